#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "fgge/calib/readout.hpp"
#include "fgge/core/errors.hpp"
#include "fgge/core/parallel.hpp"
#include "fgge/floquet/drive_table.hpp"
#include "fgge/floquet/rwa.hpp"
#include "fgge/floquet/spectroscopy.hpp"
#include "fgge/pulse/collapse.hpp"
#include "fgge/pulse/evolve.hpp"
#include "fgge/pulse/model.hpp"

namespace fgge::calib {

using pulse::Transition;
using pulse::Transmon;

struct CalibrationConfig {
  // amplitude = c_conv * Omega; 0 selects the default, which maps 1 to
  // Omega = 0.15 times the undriven fg-ge frequency.
  double c_conv = 0.0;
  int table_points = 41;
  pulse::EvolveOptions evolve;
  pulse::CollapseSet collapse;  // empty: decoherence-free
  Readout readout;
  unsigned workers = 1;
  // Preparation and analysis rotations as DRAG pulses instead of ideal
  // instantaneous rotations.
  bool pulsed_rotations = false;
};

// Ideal rotation on the k <-> k+1 transition of one transmon, for every
// spectator level: cos(a/2) - i sin(a/2) (e^{-i phi}|k><k+1| + h.c.).
inline CMat ideal_rotation(const pulse::RotatingFrameModel& m, Transmon q, Transition t, double angle, double axis) {
  const int n = m.dim();
  const int k = t == Transition::GE ? 0 : 1;
  CMat U = CMat::Identity(n, n);
  const cplx c = std::cos(0.5 * angle), s = cplx(0.0, -1.0) * std::sin(0.5 * angle);
  for (int i = 0; i < n; ++i) {
    if (m.level(q, i) != k) continue;
    const int j = q == Transmon::A ? i + m.levels_b() : i + 1;
    U(i, i) = c;
    U(j, j) = c;
    U(i, j) = s * std::exp(cplx(0.0, -axis));
    U(j, i) = s * std::exp(cplx(0.0, axis));
  }
  return U;
}

// One simulated shot sequence: a rotation block before the pulses, the pulse
// schedule, and a rotation block after. Without pulsed rotations the blocks
// are applied as ideal unitaries.
struct Rotation {
  Transmon target = Transmon::A;
  Transition transition = Transition::GE;
  double angle = 0.0;
  double axis = 0.0;
};

struct Experiment {
  std::vector<Rotation> before;
  pulse::PulseSchedule pulses;
  std::vector<Rotation> after;
  double dt = 0.0;  // integrator step override, 0 = configured
};

class CalibrationContext {
 public:
  explicit CalibrationContext(device::DeviceParams d, CalibrationConfig cfg = {})
      : device_(std::move(d)), config_(std::move(cfg)) {
    bare_ = std::make_shared<pulse::RotatingFrameModel>(device_);
    if (config_.c_conv == 0.0) config_.c_conv = 1.0 / (0.15 * bare_->statics().fgge_resonance());
    if (!(config_.c_conv > 0.0)) throw ConfigError("CalibrationConfig: c_conv must be positive");
    config_.readout.validate();
  }

  const device::DeviceParams& device() const { return device_; }
  const CalibrationConfig& config() const { return config_; }
  CalibrationConfig& config() { return config_; }
  const device::StaticSystem& statics() const { return bare_->statics(); }
  double static_resonance() const { return statics().fgge_resonance(); }

  double omega_from_amplitude(double A) const { return A / config_.c_conv; }
  double amplitude_from_omega(double omega) const { return omega * config_.c_conv; }

  // Model without an fg-ge drive table.
  const pulse::RotatingFrameModel& bare_model() const { return *bare_; }

  // Floquet resonance and coupling at A, found around an RWA prior.
  const floquet::SpectroscopyPoint& floquet_point(double A) {
    std::lock_guard lock(mutex_);
    return floquet_point_locked(A);
  }

  // Model carrying the drive table for amplitude A, taken at that
  // amplitude's Floquet resonance.
  std::shared_ptr<const pulse::RotatingFrameModel> model_for(double A) {
    std::lock_guard lock(mutex_);
    if (auto it = models_.find(A); it != models_.end()) return it->second;
    const auto& p = floquet_point_locked(A);
    auto m = std::make_shared<pulse::RotatingFrameModel>(device_);
    if (A > 0.0)
      m->set_fgge_table(std::make_shared<floquet::DriveTable>(
          floquet::extract_drive_table(statics(), omega_from_amplitude(A), p.omega_fgge, config_.table_points)));
    return models_[A] = m;
  }

  // Final density matrix of an experiment.
  CMat run(const pulse::RotatingFrameModel& m, const Experiment& e, CMat rho0) const {
    pulse::EvolveOptions opt = config_.evolve;
    if (e.dt > 0.0) opt.dt = e.dt;
    pulse::PulseSchedule sched;
    if (config_.pulsed_rotations) {
      for (const auto& r : e.before) sched.then(drag_for(r));
      sched.append(e.pulses);
      for (const auto& r : e.after) sched.then(drag_for(r));
    } else {
      for (const auto& r : e.before) {
        const CMat U = ideal_rotation(m, r.target, r.transition, r.angle, r.axis);
        rho0 = U * rho0 * U.adjoint();
      }
      sched = e.pulses;
    }
    CMat rho;
    if (config_.collapse.empty()) {
      std::vector<int> support;
      for (int i = 0; i < m.dim(); ++i)
        if (rho0.row(i).cwiseAbs().maxCoeff() > 0.0) support.push_back(i);
      const auto U = pulse::evolve_basis(m, sched, support, opt);
      CMat sub(support.size(), support.size());
      for (std::size_t i = 0; i < support.size(); ++i)
        for (std::size_t j = 0; j < support.size(); ++j) sub(i, j) = rho0(support[i], support[j]);
      rho = U * sub * U.adjoint();
    } else {
      rho = pulse::lindblad_evolve(m, sched, rho0, config_.collapse, opt);
    }
    if (!config_.pulsed_rotations)
      for (const auto& r : e.after) {
        const CMat U = ideal_rotation(m, r.target, r.transition, r.angle, r.axis);
        rho = U * rho * U.adjoint();
      }
    return rho;
  }

  CMat run(const pulse::RotatingFrameModel& m, const Experiment& e) const {
    CMat rho = CMat::Zero(m.dim(), m.dim());
    rho(0, 0) = 1.0;
    return run(m, e, rho);
  }

  // Exact populations of a batch of experiments, in parallel, then read out
  // in order so sampling is independent of the worker count.
  std::vector<QutritPopulations> measure(const pulse::RotatingFrameModel& m, const std::vector<Experiment>& batch) {
    auto exact = parallel_map(batch.size(), config_.workers,
                              [&](std::size_t k) { return qutrit_populations(m, run(m, batch[k])); });
    if (config_.readout.shots == 0 && config_.readout.confusion_a.isIdentity(0.0) &&
        config_.readout.confusion_b.isIdentity(0.0))
      return exact;
    if (!sampler_) sampler_ = std::make_unique<ReadoutSampler>(config_.readout);
    for (auto& p : exact) p = sampler_->measure(p);
    return exact;
  }

 private:
  static pulse::DragPulse drag_for(const Rotation& r) {
    pulse::DragPulse p;
    p.target = r.target;
    p.transition = r.transition;
    p.angle = r.angle;
    p.axis = r.axis;
    if (r.transition == Transition::EF) p.beta = 0.0;
    return p;
  }

  const floquet::SpectroscopyPoint& floquet_point_locked(double A) {
    if (!(A >= 0.0)) throw ConfigError("calibration: amplitude must be non-negative");
    if (auto it = points_.find(A); it != points_.end()) return it->second;
    const double omega = omega_from_amplitude(A);
    const auto& sys = statics();
    if (A == 0.0) return points_[A] = floquet::fgge_spectroscopy(sys, 0.0, {});
    std::vector<double> ramp;
    for (int k = 1; k <= 8; ++k) ramp.push_back(omega * k / 8.0);
    const floquet::RwaModel rwa(device_);
    const double prior = floquet::rwa_spectroscopy_scan(rwa, ramp).back().omega_fgge;
    return points_[A] = floquet::fgge_spectroscopy(sys, omega, {prior, units::mhz(15.0), 41});
  }

  device::DeviceParams device_;
  CalibrationConfig config_;
  std::shared_ptr<pulse::RotatingFrameModel> bare_;
  std::map<double, floquet::SpectroscopyPoint> points_;
  std::map<double, std::shared_ptr<const pulse::RotatingFrameModel>> models_;
  std::unique_ptr<ReadoutSampler> sampler_;
  std::mutex mutex_;
};

}  // namespace fgge::calib
