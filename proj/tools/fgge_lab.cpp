#include <CLI11.hpp>

#include <iostream>

#include "fgge/cli/commands.hpp"

namespace {

using fgge::cli::RunConfig;

struct Flags {
  std::string device, shots = "exact", amp_grid, detuning_grid, lengths;
};

void add_common(CLI::App& sub, RunConfig& cfg, Flags& f) {
  sub.add_option("--device", f.device, "device JSON (default: bundled reference device)");
  sub.add_option("--out", cfg.out, "output directory")->capture_default_str();
  sub.add_option("--seed", cfg.seed, "base seed for sampling and RB sequences")->capture_default_str();
  sub.add_option("--workers", cfg.workers, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  sub.add_option("--shots", f.shots, "readout shots per point, or \"exact\"")->capture_default_str();
  sub.add_option("--amplitude", cfg.amplitude, "gate drive amplitude (1 = full scale)")->capture_default_str();
  sub.add_option("--amp-grid", f.amp_grid, "spectroscopy amplitudes: lo:hi:n or a,b,c (default 0:1:11)");
  sub.add_option("--freq-window-mhz", cfg.freq_window_mhz, "Floquet resonance search half-width")->capture_default_str();
  sub.add_option("--tau-max-ns", cfg.tau_max_ns, "longest plateau for rabi/chevron (0: from g)")->capture_default_str();
  sub.add_option("--detuning-grid-mhz", f.detuning_grid, "detunings for chevron/condphase: lo:hi:n or a,b,c");
  sub.add_option("--lengths", f.lengths, "RB sequence lengths: a,b,c (default 1,3,5,8,12,17,25,35,50)");
  sub.add_option("--seeds", cfg.seeds, "random sequences per RB length")->capture_default_str();
}

void resolve(RunConfig& cfg, const Flags& f) {
  cfg.device = f.device;
  if (f.shots == "exact") {
    cfg.shots = 0;
  } else {
    try {
      std::size_t used = 0;
      cfg.shots = std::stoi(f.shots, &used);
      if (used != f.shots.size() || cfg.shots < 1) throw std::invalid_argument(f.shots);
    } catch (const std::exception&) {
      throw fgge::ConfigError("--shots: expected a positive integer or \"exact\", got \"" + f.shots + "\"");
    }
  }
  if (!f.amp_grid.empty()) cfg.amp_grid = fgge::cli::parse_grid(f.amp_grid, "--amp-grid");
  if (!f.detuning_grid.empty()) cfg.detuning_grid_mhz = fgge::cli::parse_grid(f.detuning_grid, "--detuning-grid-mhz");
  if (!f.lengths.empty()) {
    cfg.lengths.clear();
    for (double x : fgge::cli::parse_grid(f.lengths, "--lengths")) {
      if (x != std::floor(x)) throw fgge::ConfigError("--lengths: lengths must be integers");
      cfg.lengths.push_back(static_cast<int>(x));
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pulse-level simulation lab for the microwave-activated fg-ge controlled-phase gate"};
  app.require_subcommand(1);
  RunConfig cfg;
  Flags flags;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"spectroscopy", "Floquet and RWA ac-Stark shift and coupling vs drive amplitude"},
      {"rabi", "fg-ge Rabi oscillations at the measured resonance (writes the carrier used downstream)"},
      {"chevron", "fg-ge transfer vs detuning and plateau (needs rabi)"},
      {"condphase", "conditional phase vs detuning and full gate calibration (needs chevron)"},
      {"gatesim", "master-equation fidelity of the calibrated gate (needs condphase)"},
      {"rb", "interleaved randomized benchmarking of the calibrated gate (needs gatesim)"},
      {"pipeline", "all of the above in order"}};
  for (const auto& [name, help] : commands) add_common(*app.add_subcommand(name, help), cfg, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    resolve(cfg, flags);
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "spectroscopy") fgge::cli::cmd_spectroscopy(cfg);
    else if (name == "rabi") fgge::cli::cmd_rabi(cfg);
    else if (name == "chevron") fgge::cli::cmd_chevron(cfg);
    else if (name == "condphase") fgge::cli::cmd_condphase(cfg);
    else if (name == "gatesim") fgge::cli::cmd_gatesim(cfg);
    else if (name == "rb") fgge::cli::cmd_rb(cfg);
    else fgge::cli::cmd_pipeline(cfg);
    std::cout << name << ": wrote " << (cfg.out / "").string() << '\n';
    return 0;
  } catch (const fgge::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const fgge::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
}
