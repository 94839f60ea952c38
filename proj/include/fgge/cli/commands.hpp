#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "fgge/calib/chevron.hpp"
#include "fgge/calib/pipeline.hpp"
#include "fgge/cli/schema.hpp"
#include "fgge/cli/sha256.hpp"
#include "fgge/device/analytic.hpp"
#include "fgge/device/io.hpp"
#include "fgge/floquet/diagnostics.hpp"
#include "fgge/floquet/rwa.hpp"
#include "fgge/floquet/spectroscopy.hpp"
#include "fgge/rb/run.hpp"

#ifndef FGGE_DATA_DIR
#define FGGE_DATA_DIR "data"
#endif
#ifndef FGGE_SCHEMA_DIR
#define FGGE_SCHEMA_DIR "schemas"
#endif

namespace fgge::cli {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr const char* tool_version = "1.0.0";

inline fs::path default_device_path() { return fs::path(FGGE_DATA_DIR) / "reference_device.json"; }
inline fs::path schema_dir() { return fs::path(FGGE_SCHEMA_DIR); }

// "lo:hi:n" (inclusive, n points) or a comma-separated list.
inline std::vector<double> parse_grid(const std::string& text, const std::string& flag) {
  std::vector<double> v;
  auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double x = std::stod(s, &used);
      if (used != s.size() || !std::isfinite(x)) throw std::invalid_argument(s);
      return x;
    } catch (const std::exception&) {
      throw ConfigError(flag + ": cannot parse \"" + s + "\" as a number");
    }
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw ConfigError(flag + ": range must be lo:hi:n");
    const double lo = number(parts[0]), hi = number(parts[1]), n = number(parts[2]);
    if (n < 2 || std::floor(n) != n) throw ConfigError(flag + ": range needs an integer point count >= 2");
    return calib::linear_grid(lo, hi, static_cast<int>(n));
  }
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) v.push_back(number(p));
  if (v.empty()) throw ConfigError(flag + ": empty grid");
  return v;
}

inline void require_increasing(const std::vector<double>& v, const std::string& flag) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) throw ConfigError(flag + ": grid must be strictly increasing");
}

struct RunConfig {
  fs::path device;  // empty: bundled reference device
  fs::path out = "fgge_out";
  std::uint64_t seed = 1;
  unsigned workers = 1;
  int shots = 0;  // 0 = exact populations
  double amplitude = 1.0;                 // drive amplitude of the gate (1 = full scale)
  std::vector<double> amp_grid;           // spectroscopy drive amplitudes
  double freq_window_mhz = 15.0;          // Floquet search half-width
  double tau_max_ns = 0.0;                // 0: from the coupling
  std::vector<double> detuning_grid_mhz;  // chevron and condphase
  std::vector<int> lengths;               // RB; empty: default
  int seeds = 36;

  fs::path device_path() const { return device.empty() ? default_device_path() : device; }

  void validate() const {
    if (workers < 1) throw ConfigError("--workers must be at least 1");
    if (shots < 0) throw ConfigError("--shots must be a positive count or \"exact\"");
    if (!(amplitude > 0.0)) throw ConfigError("--amplitude must be positive");
    if (!(freq_window_mhz > 0.0)) throw ConfigError("--freq-window-mhz must be positive");
    if (tau_max_ns < 0.0) throw ConfigError("--tau-max-ns must be non-negative");
    if (seeds < 1) throw ConfigError("--seeds must be at least 1");
    require_increasing(amp_grid, "--amp-grid");
    for (double a : amp_grid)
      if (a < 0.0) throw ConfigError("--amp-grid: amplitudes must be non-negative");
    require_increasing(detuning_grid_mhz, "--detuning-grid-mhz");
    for (std::size_t i = 0; i < lengths.size(); ++i) {
      if (lengths[i] < 0) throw ConfigError("--lengths: lengths must be non-negative");
      if (i > 0 && lengths[i] <= lengths[i - 1]) throw ConfigError("--lengths: must be strictly increasing");
    }
    if (!lengths.empty() && lengths.size() < 4) throw ConfigError("--lengths: need at least four lengths for the fit");
  }

  // Settings that determine the outputs; the worker count does not.
  json to_json() const {
    return {{"device", device_path().string()},
            {"seed", seed},
            {"shots", shots == 0 ? json("exact") : json(shots)},
            {"amplitude", amplitude},
            {"amp_grid", amp_grid},
            {"freq_window_mhz", freq_window_mhz},
            {"tau_max_ns", tau_max_ns},
            {"detuning_grid_mhz", detuning_grid_mhz},
            {"lengths", lengths},
            {"seeds", seeds}};
  }
};

// Writes files under the output directory, validates JSON against the
// shipped schemas and records hashes in manifest.json.
class ArtifactWriter {
 public:
  ArtifactWriter(const RunConfig& cfg, std::string command) : cfg_(cfg), command_(std::move(command)) {
    std::error_code ec;
    fs::create_directories(cfg_.out, ec);
    if (ec) throw ConfigError("cannot create output directory " + cfg_.out.string() + ": " + ec.message());
  }

  void write_json(const std::string& rel, const json& j, const std::string& schema) {
    const auto errors = SchemaValidator::from_file(schema_dir() / (schema + ".schema.json")).validate(j);
    if (!errors.empty()) {
      std::string msg = rel + " violates schema " + schema + ":";
      for (const auto& e : errors) msg += "\n  " + e;
      throw NumericalError(msg);
    }
    put(rel, j.dump(2) + "\n");
  }

  void write_csv(const std::string& rel, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows) {
    std::ostringstream f;
    f << std::setprecision(12);
    for (std::size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
    f << '\n';
    for (const auto& r : rows) {
      if (r.size() != header.size()) throw NumericalError(rel + ": row width differs from header");
      for (std::size_t i = 0; i < r.size(); ++i) f << (i ? "," : "") << r[i];
      f << '\n';
    }
    put(rel, f.str());
  }

  void write_text(const std::string& rel, const std::string& text) { put(rel, text); }

  // Merges this command's entry into manifest.json.
  void finish() {
    const fs::path path = cfg_.out / "manifest.json";
    json m;
    if (fs::exists(path)) {
      try {
        m = json::parse(read_file(path));
      } catch (const json::parse_error&) {
        m = json::object();
      }
    }
    const json config = cfg_.to_json();
    m["tool"] = "fgge_lab";
    m["version"] = tool_version;
    m["versions"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                     {"compiler", __VERSION__}};
    m["device"] = {{"path", cfg_.device_path().string()}, {"sha256", sha256_file(cfg_.device_path())}};
    if (!m.contains("commands") || !m["commands"].is_object()) m["commands"] = json::object();
    m["commands"][command_] = {{"config", config}, {"config_sha256", sha256_hex(config.dump())}, {"files", files_}};
    const auto errors = SchemaValidator::from_file(schema_dir() / "manifest.schema.json").validate(m);
    if (!errors.empty()) throw NumericalError("manifest violates schema: " + errors.front());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path.string());
    f << m.dump(2) << '\n';
  }

 private:
  void put(const std::string& rel, const std::string& text) {
    const fs::path path = cfg_.out / rel;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path.string());
    f << text;
    if (!f) throw ConfigError("write failed for " + path.string());
    files_[rel] = sha256_hex(text);
  }

  const RunConfig& cfg_;
  std::string command_;
  std::map<std::string, std::string> files_;
};

inline json read_artifact(const RunConfig& cfg, const std::string& rel, const std::string& producer,
                          const std::string& consumer) {
  const fs::path path = cfg.out / rel;
  if (!fs::exists(path))
    throw ConfigError(consumer + " needs " + path.string() + ", which is written by `fgge_lab " + producer +
                      " --out " + cfg.out.string() + "`; run that command first");
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what() + "; rerun `fgge_lab " + producer + "`");
  }
}

template <class T>
T field(const json& j, const std::string& key, const std::string& source) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(source + ": missing or invalid \"" + key + "\"");
  }
}

inline device::DeviceParams load_device(const RunConfig& cfg) { return device::load_device_json(cfg.device_path().string()); }

inline calib::CalibrationContext make_context(const RunConfig& cfg) {
  calib::CalibrationConfig c;
  c.workers = cfg.workers;
  c.readout.shots = cfg.shots;
  c.readout.seed = cfg.seed;
  return calib::CalibrationContext(load_device(cfg), c);
}

// ---- spectroscopy ----------------------------------------------------------

inline void cmd_spectroscopy(const RunConfig& cfg) {
  cfg.validate();
  const auto dev = load_device(cfg);
  auto ctx = make_context(cfg);
  std::vector<double> amps = cfg.amp_grid;
  if (amps.empty()) amps = calib::linear_grid(0.0, 1.0, 11);
  std::vector<double> omegas;
  for (double a : amps)
    if (a > 0.0) omegas.push_back(ctx.omega_from_amplitude(a));

  floquet::SpectroscopyOptions so;
  so.half_width = units::mhz(cfg.freq_window_mhz);
  so.workers = cfg.workers;
  const auto& sys = ctx.statics();
  const floquet::RwaModel rwa(dev);
  const auto fl = floquet::floquet_spectroscopy_with_prior(sys, rwa, omegas, so);
  const auto rw = floquet::rwa_spectroscopy_ramped(rwa, omegas, so);

  std::vector<std::vector<double>> rows;
  bool monotone = true;
  double last_shift = 1.0;
  std::size_t k = 0;
  for (double a : amps) {
    floquet::SpectroscopyPoint f, r;
    f.omega_fgge = sys.fgge_resonance();
    r.omega_fgge = rwa.static_resonance();
    const double Omega = ctx.omega_from_amplitude(a);
    if (a > 0.0) {
      f = fl[k];
      r = rw[k];
      ++k;
    }
    const auto h = floquet::higher_level_diagnostics(sys, {Omega, f.omega_fgge + units::mhz(50.0), 0.0});
    const double g2 = Omega > 0.0 ? std::abs(device::analytic_g_fgge(Omega, dev.J, dev.qubit_a.alpha, dev.detuning())) : 0.0;
    if (!rows.empty() && !(f.delta_ac < last_shift)) monotone = false;
    last_shift = f.delta_ac;
    rows.push_back({a, units::to_mhz(Omega), units::to_ghz(f.omega_fgge), units::to_mhz(f.delta_ac),
                    units::to_mhz(f.g_fgge), units::to_ghz(r.omega_fgge), units::to_mhz(r.delta_ac),
                    units::to_mhz(r.g_fgge), units::to_mhz(g2), h.level(3), h.level(4)});
  }

  json summary{{"command", "spectroscopy"},
               {"points", rows.size()},
               {"omega_at_unit_amplitude_MHz", units::to_mhz(ctx.omega_from_amplitude(1.0))},
               {"static_resonance_GHz", units::to_ghz(sys.fgge_resonance())},
               {"chi_MHz",
                {{"charge_basis", units::to_mhz(sys.chi())},
                 {"ladder", units::to_mhz(floquet::RwaModel(dev, 6, 4, floquet::RwaBasis::Duffing).chi())},
                 {"analytic", units::to_mhz(device::analytic_chi(dev.J, dev.qubit_a.alpha, dev.qubit_b.alpha, dev.detuning()))}}},
               {"monotone_delta_ac", monotone}};
  const double top = amps.back();
  if (top > 0.0) {
    // Calibration-suite measurement at the largest amplitude, with the
    // gate-shaped probe and with sharp edges.
    const auto gate = calib::ac_stark_spectroscopy(ctx, top);
    const auto sharp = calib::ac_stark_spectroscopy(ctx, top, {}, units::ns(0.3));
    const double res = fl.back().omega_fgge;
    summary["cross_check"] = {{"amplitude", top},
                              {"floquet_resonance_GHz", units::to_ghz(res)},
                              {"gate_probe", calib::to_json(gate)},
                              {"sharp_probe", calib::to_json(sharp)},
                              {"gate_probe_offset_MHz", units::to_mhz(gate.omega_fgge - res)},
                              {"sharp_probe_offset_MHz", units::to_mhz(sharp.omega_fgge - res)}};
  }
  ArtifactWriter w(cfg, "spectroscopy");
  w.write_json("spectroscopy/summary.json", summary, "spectroscopy");
  w.write_csv("spectroscopy/data.csv",
              {"amplitude", "omega_MHz", "floquet_resonance_GHz", "floquet_delta_ac_MHz", "floquet_g_MHz",
               "rwa_resonance_GHz", "rwa_delta_ac_MHz", "rwa_g_MHz", "analytic_g_MHz", "pop_h", "pop_i"},
              rows);
  w.finish();
}

// ---- rabi -------------------------------------------------------------------

struct Upstream {
  double amplitude = 0.0;
  double carrier = 0.0;  // rad/s
  double g = 0.0;        // rad/s
};

inline json to_json(const Upstream& u) {
  return {{"amplitude", u.amplitude}, {"carrier_rad_per_s", u.carrier}, {"g_rad_per_s", u.g}};
}

inline Upstream read_upstream(const RunConfig& cfg, const std::string& consumer) {
  const json j = read_artifact(cfg, "rabi/summary.json", "rabi", consumer);
  const std::string src = (cfg.out / "rabi/summary.json").string();
  if (!j.contains("upstream")) throw ConfigError(src + ": missing \"upstream\"; rerun `fgge_lab rabi`");
  const json& u = j["upstream"];
  Upstream r{field<double>(u, "amplitude", src), field<double>(u, "carrier_rad_per_s", src),
             field<double>(u, "g_rad_per_s", src)};
  if (!(r.amplitude > 0.0 && r.carrier > 0.0 && r.g > 0.0)) throw ConfigError(src + ": non-positive upstream values");
  return r;
}

inline void cmd_rabi(const RunConfig& cfg) {
  cfg.validate();
  auto ctx = make_context(cfg);
  const double A = cfg.amplitude;
  const auto spec = calib::ac_stark_spectroscopy(ctx, A);
  std::vector<double> plateaus;
  if (cfg.tau_max_ns > 0.0) plateaus = calib::linear_grid(0.0, units::ns(cfg.tau_max_ns), 61);
  const auto rabi = calib::rabi_calibration(ctx, A, spec.omega_fgge, plateaus);
  const Upstream up{A, spec.omega_fgge, rabi.g};
  json summary{{"command", "rabi"},
               {"amplitude", A},
               {"carrier_GHz", units::to_ghz(spec.omega_fgge)},
               {"g_MHz", units::to_mhz(rabi.g)},
               {"floquet_g_MHz", units::to_mhz(ctx.floquet_point(A).g_fgge)},
               {"spectroscopy", calib::to_json(spec)},
               {"rabi", calib::to_json(rabi)},
               {"upstream", to_json(up)}};
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < rabi.plateaus.size(); ++i)
    rows.push_back({units::to_ns(rabi.plateaus[i]), rabi.p_e_b[i], rabi.p_f_b[i]});
  std::vector<std::vector<double>> spec_rows;
  for (std::size_t i = 0; i < spec.frequencies.size(); ++i)
    spec_rows.push_back({units::to_ghz(spec.frequencies[i]), spec.p_g_a[i]});
  ArtifactWriter w(cfg, "rabi");
  w.write_json("rabi/summary.json", summary, "rabi");
  w.write_csv("rabi/data.csv", {"plateau_ns", "p_e_b", "p_f_b"}, rows);
  w.write_csv("rabi/spectroscopy.csv", {"carrier_GHz", "p_g_a"}, spec_rows);
  w.finish();
}

// ---- chevron ----------------------------------------------------------------

inline std::vector<double> detuning_grid(const RunConfig& cfg, std::vector<double> fallback_mhz) {
  const auto& src = cfg.detuning_grid_mhz.empty() ? fallback_mhz : cfg.detuning_grid_mhz;
  std::vector<double> d;
  for (double x : src) d.push_back(units::mhz(x));
  return d;
}

inline void cmd_chevron(const RunConfig& cfg) {
  cfg.validate();
  const Upstream up = read_upstream(cfg, "chevron");
  auto ctx = make_context(cfg);
  const auto det = detuning_grid(cfg, calib::linear_grid(-2.0, 2.0, 17));
  const double tau_max = cfg.tau_max_ns > 0.0 ? units::ns(cfg.tau_max_ns) : units::two_pi / up.g;
  const auto scan = calib::chevron_scan(ctx, up.amplitude, up.carrier, calib::linear_grid(0.0, tau_max, 41), det);
  json summary{{"command", "chevron"}, {"upstream", to_json(up)}, {"chevron", calib::to_json(scan)}};
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < scan.detunings.size(); ++i)
    for (std::size_t k = 0; k < scan.plateaus.size(); ++k)
      rows.push_back({units::to_mhz(scan.detunings[i]), units::to_ns(scan.plateaus[k]),
                      scan.p_e_b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)),
                      scan.p_f_a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k))});
  ArtifactWriter w(cfg, "chevron");
  w.write_json("chevron/summary.json", summary, "chevron");
  w.write_csv("chevron/data.csv", {"detuning_MHz", "plateau_ns", "p_e_b", "p_f_a"}, rows);
  w.finish();
}

// ---- condphase --------------------------------------------------------------

inline void cmd_condphase(const RunConfig& cfg) {
  cfg.validate();
  read_artifact(cfg, "chevron/summary.json", "chevron", "condphase");
  const Upstream up = read_upstream(cfg, "condphase");
  auto ctx = make_context(cfg);
  calib::CalibrationOptions opt;
  opt.amplitude = up.amplitude;
  opt.upstream = calib::CalibrationOptions::Upstream{up.carrier, up.g};
  opt.detunings = detuning_grid(cfg, {});
  const auto rec = calib::run_calibration(ctx, opt);
  const json record = calib::to_json(rec);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < rec.scan.points.size(); ++i) {
    const auto& p = rec.scan.points[i];
    rows.push_back({units::to_mhz(p.detuning), units::to_ns(p.plateau), p.phase_g, p.phase_e, p.phi_c,
                    rec.scan.phi_c_unwrapped[i]});
  }
  ArtifactWriter w(cfg, "condphase");
  w.write_json("condphase/summary.json", {{"command", "condphase"}, {"upstream", to_json(up)}, {"calibration", record}},
               "condphase");
  w.write_csv("condphase/data.csv",
              {"detuning_MHz", "tau_star_ns", "phase_g_rad", "phase_e_rad", "phi_c_rad", "phi_c_unwrapped_rad"}, rows);
  w.write_json("calibration.json", record, "calibration");
  w.finish();
}

// ---- gatesim ----------------------------------------------------------------

struct GateSimResult {
  calib::GateParams gate;
  pulse::GateFidelity closed;
  pulse::GateFidelity open;
};

inline GateSimResult simulate_gate(calib::CalibrationContext& ctx, const calib::GateParams& gate) {
  const auto m = ctx.model_for(gate.amplitude);
  const auto sched = gate.to_schedule();
  const auto collapse = pulse::CollapseSet::from_device(ctx.device(), m->levels_a(), m->levels_b());
  GateSimResult r;
  r.gate = gate;
  r.closed = pulse::average_gate_fidelity(pulse::channel_from_schedule(*m, sched, {}), m->computational(), pulse::ideal_cz());
  r.open = pulse::average_gate_fidelity(pulse::channel_from_schedule(*m, sched, collapse), m->computational(), pulse::ideal_cz());
  return r;
}

inline json to_json(const pulse::GateFidelity& f) {
  return {{"average_fidelity", f.average}, {"process_fidelity", f.process}, {"leakage", f.leakage()}};
}

inline calib::GateParams read_gate(const RunConfig& cfg, const std::string& rel, const std::string& producer,
                                   const std::string& consumer, bool nested) {
  const json j = read_artifact(cfg, rel, producer, consumer);
  try {
    return calib::gate_params_from_json(nested ? j.at("gate") : j);
  } catch (const json::exception& e) {
    throw ConfigError((cfg.out / rel).string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError((cfg.out / rel).string() + ": " + e.what());
  }
}

inline void cmd_gatesim(const RunConfig& cfg) {
  cfg.validate();
  const auto gate = read_gate(cfg, "calibration.json", "condphase", "gatesim", true);
  auto ctx = make_context(cfg);
  const auto r = simulate_gate(ctx, gate);
  json summary{{"command", "gatesim"},
               {"gate", calib::to_json(gate)},
               {"decoherence_free", to_json(r.closed)},
               {"with_decoherence", to_json(r.open)}};
  ArtifactWriter w(cfg, "gatesim");
  w.write_json("gatesim/summary.json", summary, "gatesim");
  w.write_csv("gatesim/data.csv", {"with_decoherence", "average_fidelity", "process_fidelity", "leakage"},
              {{0.0, r.closed.average, r.closed.process, r.closed.leakage()},
               {1.0, r.open.average, r.open.process, r.open.leakage()}});
  w.write_json("gatesim/gate_params.json", calib::to_json(gate), "gate_params");
  w.finish();
}

// ---- rb ---------------------------------------------------------------------

inline void cmd_rb(const RunConfig& cfg) {
  cfg.validate();
  const auto gate = read_gate(cfg, "gatesim/gate_params.json", "gatesim", "rb", false);
  auto ctx = make_context(cfg);
  const auto m = ctx.model_for(gate.amplitude);
  const auto collapse = pulse::CollapseSet::from_device(ctx.device(), m->levels_a(), m->levels_b());
  const rb::CliffordGroup group(2);
  rb::ModelChannels channels(m, collapse, gate.to_schedule());
  rb::RBOptions opt;
  if (!cfg.lengths.empty()) opt.lengths = cfg.lengths;
  opt.seeds = cfg.seeds;
  opt.seed = cfg.seed;
  opt.workers = cfg.workers;
  opt.shots = cfg.shots;
  const auto r = rb::run_rb(group, channels, opt);
  json summary{{"command", "rb"},
               {"gate", calib::to_json(gate)},
               {"clifford_mean_cz", group.mean_cz()},
               {"clifford_mean_slots", group.mean_slots()},
               {"channels_built", channels.cached()},
               {"result", rb::to_json(r)}};
  std::ostringstream curves;
  rb::write_curves_csv(curves, r);
  ArtifactWriter w(cfg, "rb");
  w.write_json("rb/rb_summary.json", summary, "rb");
  w.write_text("rb/rb_curves.csv", curves.str());
  w.finish();
}

// ---- pipeline ---------------------------------------------------------------

inline void cmd_pipeline(const RunConfig& cfg) {
  cmd_spectroscopy(cfg);
  cmd_rabi(cfg);
  cmd_chevron(cfg);
  cmd_condphase(cfg);
  cmd_gatesim(cfg);
  cmd_rb(cfg);
}

}  // namespace fgge::cli
