// Acceptance report: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>

#include "fgge/cli/commands.hpp"
#include "fgge/floquet/spectroscopy.hpp"
#include "fgge/numerics/ode.hpp"
#include "fgge/rb/run.hpp"

namespace {

using namespace fgge;
using cli::json;

class Clock {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

int failures = 0;

void report(const std::string& id, bool ok, const std::string& detail, double seconds) {
  if (!ok) ++failures;
  char t[32];
  std::snprintf(t, sizeof t, "%.1f s", seconds);
  std::cout << id << ' ' << (ok ? "PASS" : "FAIL") << "  " << detail << "  [" << t << "]" << std::endl;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

bool within(double x, double centre, double tol) { return std::abs(x - centre) <= tol; }

json load(const cli::RunConfig& cfg, const std::string& rel) { return json::parse(cli::read_file(cfg.out / rel)); }

std::vector<std::vector<double>> read_csv(const cli::fs::path& path) {
  std::ifstream f(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::getline(f, line);
  while (std::getline(f, line)) {
    std::vector<double> r;
    std::stringstream ss(line);
    for (std::string x; std::getline(ss, x, ',');) r.push_back(std::stod(x));
    rows.push_back(r);
  }
  return rows;
}

void chi_criterion(const device::DeviceParams& dev) {
  Clock c;
  const double analytic = units::to_mhz(device::analytic_chi(dev.J, dev.qubit_a.alpha, dev.qubit_b.alpha, dev.detuning()));
  const double ladder = units::to_mhz(floquet::RwaModel(dev, 6, 4, floquet::RwaBasis::Duffing).chi());
  const double charge = units::to_mhz(device::StaticSystem(dev).chi());
  const double rel = std::abs(ladder / analytic - 1.0);
  const double t = c.seconds();
  report("AC1", within(analytic, -0.848, 0.005) && rel < 0.01 && t < 1.0,
         fmt("chi analytic %.4f MHz (-0.848 +/- 0.005); ladder %.4f MHz, %.2f%% off (< 1%%); charge basis %.4f MHz", analytic,
             ladder, 100.0 * rel, charge),
         t);
}

void bare_resonance_criterion(const device::DeviceParams& dev) {
  Clock c;
  const device::StaticSystem sys(dev);
  const auto p = floquet::fgge_spectroscopy(sys, 0.0, {sys.fgge_resonance(), units::mhz(15.0), 41});
  const double f = units::to_ghz(p.omega_fgge);
  const double t = c.seconds();
  report("AC2", std::abs(f - 7.739) * 1e3 <= 5.0 && t < 10.0,
         fmt("zero-drive resonance %.6f GHz, %.2f MHz from 7.739 GHz (<= 5 MHz)", f, (f - 7.739) * 1e3), t);
}

void spectroscopy_criteria(const cli::RunConfig& cfg, double seconds) {
  // amplitude, omega, f_res, dac, g, rwa_res, rwa_dac, rwa_g, analytic_g, pop_h, pop_i
  const auto rows = read_csv(cfg.out / "spectroscopy/data.csv");
  std::vector<std::vector<double>> driven;
  for (const auto& r : rows)
    if (r[0] > 0.0) driven.push_back(r);
  const std::size_t quartile = (driven.size() + 3) / 4;
  double worst = 0.0;
  for (std::size_t i = 0; i < quartile; ++i) worst = std::max(worst, std::abs(driven[i][4] / driven[i][8] - 1.0));
  const auto& top = driven.back();
  const double ratio_drive = top[1] * 1e-3 / top[2];
  const auto dev_of = [](const std::vector<double>& r) { return std::abs(r[7] / r[4] - 1.0); };
  const double dev_small = dev_of(driven.front()), dev_top = dev_of(top);
  const bool ok = driven.size() == 10 && worst < 0.10 && within(top[4], 5.0, 0.5) && dev_top >= 5.0 * dev_small;
  report("AC3", ok,
         fmt("low-quartile |g/g_analytic - 1| <= %.2f%% (< 10%%); g %.3f MHz at Omega/omega %.3f (5.0 +/- 0.5)",
             100.0 * worst, top[4], ratio_drive) +
             fmt("; RWA deviation %.3f%% vs %.4f%% at lowest amplitude, ratio %.1f (>= 5)", 100.0 * dev_top,
                 100.0 * dev_small, dev_top / dev_small),
         seconds);
  report("AC4", within(100.0 * top[9], 30.0, 10.0) && within(100.0 * top[10], 6.0, 10.0),
         fmt("max-amplitude |h> %.1f%% (30 +/- 10), |i> %.1f%% (6 +/- 10)", 100.0 * top[9], 100.0 * top[10]), 0.0);
}

void calibration_criterion(const cli::RunConfig& cfg, double seconds) {
  const json c = load(cfg, "calibration.json");
  const double phi = c["gate"]["phi_c_rad"].get<double>();
  const double phase_err = std::abs(std::remainder(std::abs(phi) - units::pi, 2.0 * units::pi)) * 180.0 / units::pi;
  const double recovery = c["recovery"].get<double>();
  const double res = std::max(std::abs(c["residual_a_deg"].get<double>()), std::abs(c["residual_b_deg"].get<double>()));
  const double tg = units::to_ns(calib::analytic_gate_math(units::mhz(5.0), 0.0).t_g);
  const double delta = c["gate"]["detuning_MHz"].get<double>();
  const bool ok = phase_err <= 0.5 && recovery >= 0.999 && res < 0.5 && std::abs(tg - 100.0) < 1e-9 && delta > 0.0 &&
                  within(delta, 0.962, 0.7);
  report("AC5", ok,
         fmt("|phi_c| - pi = %.2e deg (<= 0.5); recovery %.6f (>= 0.999); residual phases %.1e deg (< 0.5)", phase_err,
             recovery, res) +
             fmt("; t_g(5 MHz, 0) %.9f ns (100); detuning %.4f MHz (0.962 +/- 0.7, > 0)", tg, delta),
         seconds);
}

void gatesim_criterion(const cli::RunConfig& cfg, double seconds) {
  const json g = load(cfg, "gatesim/summary.json");
  const double open = g["with_decoherence"]["average_fidelity"].get<double>();
  const double closed = g["decoherence_free"]["average_fidelity"].get<double>();
  report("AC6", within(open, 0.975, 0.010) && closed > 0.999 && seconds < 900.0,
         fmt("fidelity with decoherence %.4f (0.975 +/- 0.010); decoherence-free %.8f (> 0.999)", open, closed), seconds);
}

void rb_criterion(const cli::RunConfig& cfg, double seconds) {
  const json r = load(cfg, "rb/rb_summary.json")["result"];
  const double ref = r["reference_clifford_fidelity"].get<double>();
  const double cz = r["cz_fidelity"].get<double>();
  const double la = r["leakage"]["per_gate_a"].get<double>();
  const double lb = r["leakage"]["per_gate_b"].get<double>();
  const int max_len = r["lengths"].back().get<int>();
  const bool leak_ok = la >= 0.0035 && la <= 0.014;
  const bool ratio_ok = la >= 5.0 * lb;
  const bool ok = r["seeds"].get<int>() == 36 && max_len <= 50 && within(100.0 * ref, 94.5, 1.5) &&
                  within(100.0 * cz, 97.5, 1.0) && leak_ok && ratio_ok && seconds < 1800.0;
  report("AC7", ok,
         fmt("reference %.2f%% (94.5 +/- 1.5); CZ %.2f%% (97.5 +/- 1.0); leakage A %.3f%% (0.35..1.4)", 100.0 * ref,
             100.0 * cz, 100.0 * la) +
             fmt("; leakage B %.4f%%, A >= 5 B: %s", 100.0 * lb) + (ratio_ok ? "yes" : "no"),
         seconds);
}

rb::DecayFit noisy_fit(std::mt19937_64& rng, const std::vector<double>& s) {
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<double> y;
  for (double x : s) y.push_back(0.5 + 0.5 * std::pow(0.95, x) + noise(rng));
  return rb::fit_rb_decay(s, y);
}

void property_criterion(const cli::RunConfig& cfg) {
  Clock c;
  std::vector<std::string> failed;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) failed.push_back(what);
  };

  const rb::CliffordGroup two(2), one(1);
  check(two.size() == 11520 && one.size() == 24, "clifford order");

  // Channels of the calibrated gate and of one single-qubit slot.
  const auto gate = cli::read_gate(cfg, "gatesim/gate_params.json", "gatesim", "acceptance", false);
  auto ctx = cli::make_context(cfg);
  const auto m = ctx.model_for(gate.amplitude);
  const auto collapse = pulse::CollapseSet::from_device(ctx.device(), m->levels_a(), m->levels_b());
  const auto closed = pulse::channel_from_schedule(*m, gate.to_schedule(), {});
  const auto open = pulse::channel_from_schedule(*m, gate.to_schedule(), collapse);
  rb::ModelChannels slots(ctx.model_for(0.0), collapse, {});
  rb::PhysicalOp x;
  x.pulse_a = static_cast<int>(rb::Native::X180);
  x.pulse_b = static_cast<int>(rb::Native::Y90);
  const auto& slot = slots.get(x);
  double tp = 0.0, cp = 0.0;
  for (const auto* ch : {&closed, &open, &slot}) {
    tp = std::max(tp, ch->trace_preservation_error());
    cp = std::min(cp, ch->choi_min_eigenvalue());
  }
  check(tp < 1e-8, "trace preservation");
  check(cp > -1e-8, "complete positivity");
  const double unitarity = (closed.S.adjoint() * closed.S - CMat::Identity(closed.S.rows(), closed.S.cols())).norm();
  check(unitarity < 1e-8, "closed-system unitarity");

  auto rhs = [](double t, const CVec& y) {
    CMat h(2, 2);
    const double f = 2.0 * std::cos(3.0 * t);
    h << 0.5, f, f, -0.5;
    return CVec(cplx(0, -1) * (h * y));
  };
  CVec y0(2);
  y0 << 1.0, 0.0;
  const CVec ref = numerics::ode_step_evolve(rhs, y0, 0.0, 4.0, 1e-4);
  const double order = std::log2((numerics::ode_step_evolve(rhs, y0, 0.0, 4.0, 0.04) - ref).norm() /
                                 (numerics::ode_step_evolve(rhs, y0, 0.0, 4.0, 0.02) - ref).norm());
  check(within(order, 4.0, 0.3), "integrator order");

  const std::vector<double> s{1, 3, 5, 8, 12, 17, 25, 35, 50};
  std::mt19937_64 rng(3);
  double sq = 0.0;
  int covered = 0;
  const int trials = 400;
  for (int t = 0; t < trials; ++t) {
    const auto f = noisy_fit(rng, s);
    sq += (f.p - 0.95) * (f.p - 0.95);
    if (std::abs(f.p - 0.95) < 2.0 * f.p_error) ++covered;
  }
  check(std::sqrt(sq / trials) < 0.005 && covered > 0.88 * trials, "decay-fit Monte-Carlo");

  rb::IdealChannels ideal;
  rb::RBOptions opt;
  opt.lengths = {0, 2, 5, 9};
  opt.seeds = 6;
  opt.seed = 99;
  opt.shots = 200;
  pulse::QuantumChannel noise = pulse::QuantumChannel::identity(4);
  noise.S *= 0.9;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) noise.S(i + 4 * i, j + 4 * j) += 0.1 / 4;
  opt.clifford_noise = noise;
  const auto a = rb::run_rb(two, ideal, opt);
  opt.workers = 3;
  const auto b = rb::run_rb(two, ideal, opt);
  check(rb::to_json(a).dump() == rb::to_json(b).dump(), "seed determinism");

  std::string detail = fmt("clifford order %.0f; max TP error %.1e; min Choi eigenvalue %.1e; unitarity %.1e",
                           static_cast<double>(two.size()), tp, cp, unitarity) +
                       fmt("; RK4 order %.2f; fit RMS %.4f, 2-sigma coverage %.0f%%", order, std::sqrt(sq / trials),
                           100.0 * covered / trials);
  for (const auto& f : failed) detail += "; failed: " + f;
  const double t = c.seconds();
  report("AC8", failed.empty() && t < 600.0, detail, t);
}

}  // namespace

int main(int argc, char** argv) {
  cli::RunConfig cfg;
  cfg.out = argc > 1 ? argv[1] : "acceptance_out";
  std::error_code ec;
  cli::fs::remove_all(cfg.out, ec);
  try {
    const auto dev = cli::load_device(cfg);
    chi_criterion(dev);
    bare_resonance_criterion(dev);

    Clock spec;
    cli::cmd_spectroscopy(cfg);
    spectroscopy_criteria(cfg, spec.seconds());

    Clock cal;
    cli::cmd_rabi(cfg);
    cli::cmd_chevron(cfg);
    cli::cmd_condphase(cfg);
    calibration_criterion(cfg, cal.seconds());

    Clock sim;
    cli::cmd_gatesim(cfg);
    gatesim_criterion(cfg, sim.seconds());

    Clock rbc;
    cli::cmd_rb(cfg);
    rb_criterion(cfg, rbc.seconds());

    property_criterion(cfg);
  } catch (const std::exception& e) {
    std::cout << "acceptance aborted: " << e.what() << std::endl;
    return 2;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
