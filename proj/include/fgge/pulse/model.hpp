#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fgge/core/errors.hpp"
#include "fgge/core/units.hpp"
#include "fgge/device/params.hpp"
#include "fgge/device/static_system.hpp"
#include "fgge/floquet/drive_table.hpp"
#include "fgge/numerics/linalg.hpp"
#include "fgge/pulse/schedule.hpp"

namespace fgge::pulse {

// Time-dependent Hamiltonian of a compiled schedule in the qubit frame
// (level k of transmon q rotating at k omega_q): static diagonal, drive
// shifts on the diagonal, and complex couplings on fixed level pairs.
class CompiledSchedule {
 public:
  struct Pair {
    int upper;
    int lower;
  };
  using Segment = std::function<void(double t, RVec& shift, CVec& coupling)>;

  int dim() const { return static_cast<int>(static_energy.size()); }

  void shifts(double t, RVec& out) const {
    out.setZero(dim());
    CVec dummy = CVec::Zero(static_cast<Eigen::Index>(pairs.size()));
    for (const auto& s : segments)
      if (t >= s.start && t <= s.end && s.has_shift) s.eval(t, out, dummy);
  }
  void couplings(double t, CVec& out) const {
    out.setZero(static_cast<Eigen::Index>(pairs.size()));
    RVec dummy = RVec::Zero(dim());
    for (const auto& s : segments)
      if (t >= s.start && t <= s.end) s.eval(t, dummy, out);
  }

  struct Window {
    double start;
    double end;
    bool has_shift;
    Segment eval;
  };

  RVec static_energy;        // rad/s
  RVec final_phase;          // virtual-Z phase applied after the last step
  std::vector<Pair> pairs;
  std::vector<Window> segments;
  double duration = 0.0;
};

// Effective two-transmon model for pulse-level dynamics: levels_a x levels_b
// dressed levels taken from a larger static diagonalization, single-transmon
// pulses in the rotating-wave approximation and the fg-ge drive described by
// a Floquet drive table (per-level shifts and pair coupling).
class RotatingFrameModel {
 public:
  explicit RotatingFrameModel(const device::DeviceParams& d, int levels_a = 4, int levels_b = 3, int static_a = 6,
                              int static_b = 4)
      : device_(d), statics_(std::make_shared<device::StaticSystem>(d, static_a, static_b)), la_(levels_a), lb_(levels_b) {
    if (levels_a < 3 || levels_b < 2 || levels_a > static_a || levels_b > static_b)
      throw ConfigError("RotatingFrameModel: kept levels must include f on A and fit the static system");
    const auto& s = *statics_;
    wq_ = {s.qubit_frequency_a(), s.qubit_frequency_b()};
    h_.resize(dim());
    for (int a = 0; a < la_; ++a)
      for (int b = 0; b < lb_; ++b)
        h_[index(a, b)] = s.energy(a, b) - s.energy(0, 0) - a * wq_[0] - b * wq_[1];
    for (int q = 0; q < 2; ++q) {
      const auto& sp = q == 0 ? s.spectrum_a() : s.spectrum_b();
      const int L = q == 0 ? la_ : lb_;
      for (int k = 0; k + 1 < L; ++k) lambda_[q].push_back(sp.n_matrix(k, k + 1) / sp.n01());
    }
    ef_ = {s.energy(2, 0) - s.energy(1, 0), lb_ > 2 ? s.energy(0, 2) - s.energy(0, 1) : 0.0};
  }

  const device::DeviceParams& device() const { return device_; }
  const device::StaticSystem& statics() const { return *statics_; }
  int levels_a() const { return la_; }
  int levels_b() const { return lb_; }
  int dim() const { return la_ * lb_; }
  int index(int a, int b) const { return a * lb_ + b; }
  int level(Transmon q, int i) const { return q == Transmon::A ? i / lb_ : i % lb_; }
  int levels(Transmon q) const { return q == Transmon::A ? la_ : lb_; }

  const RVec& energies() const { return h_; }
  double qubit_frequency(Transmon q) const { return wq_[q == Transmon::A ? 0 : 1]; }
  double transition_frequency(Transmon q, Transition t) const {
    return t == Transition::GE ? qubit_frequency(q) : ef_[q == Transmon::A ? 0 : 1];
  }
  double anharmonicity(Transmon q) const {
    return transition_frequency(q, Transition::EF) - transition_frequency(q, Transition::GE);
  }
  // n_(k,k+1) / n_01 of the isolated transmon.
  double matrix_element(Transmon q, int k) const { return lambda_[q == Transmon::A ? 0 : 1].at(k); }
  double chi() const { return h_[index(1, 1)]; }

  std::vector<int> computational() const { return {index(0, 0), index(0, 1), index(1, 0), index(1, 1)}; }

  void set_fgge_table(std::shared_ptr<const floquet::DriveTable> t) {
    if (t && (t->levels_a != la_ || t->levels_b != lb_))
      throw ConfigError("RotatingFrameModel: drive table levels do not match the model");
    table_ = std::move(t);
  }
  const floquet::DriveTable* fgge_table() const { return table_.get(); }
  // Carrier offset beyond which the fixed-frequency table is not trusted.
  double table_window = units::mhz(30.0);

  CompiledSchedule compile(const PulseSchedule& sched) const {
    CompiledSchedule c;
    c.static_energy = h_;
    c.duration = sched.duration();
    const auto& entries = sched.entries();
    for (std::size_t n = 0; n < entries.size(); ++n) {
      const auto& e = entries[n];
      const FrameTracker frame = sched.frames_before(n);
      if (auto* p = std::get_if<FlatTopPulse>(&e.op)) add_fgge(c, e.start, *p, frame);
      else if (auto* d = std::get_if<DragPulse>(&e.op)) add_drag(c, e.start, *d, frame);
    }
    const FrameTracker f = sched.final_frames();
    c.final_phase.resize(dim());
    for (int i = 0; i < dim(); ++i) c.final_phase[i] = f[Transmon::A] * level(Transmon::A, i) + f[Transmon::B] * level(Transmon::B, i);
    return c;
  }

 private:
  void add_fgge(CompiledSchedule& c, double start, const FlatTopPulse& p, const FrameTracker& frame) const {
    if (p.omega == 0.0) return;
    if (!table_) throw ConfigError("RotatingFrameModel: fg-ge pulse needs a drive table (set_fgge_table)");
    const auto tab = table_;
    if (p.omega > tab->amplitude_max * (1.0 + 1e-9))
      throw ConfigError("RotatingFrameModel: fg-ge amplitude exceeds the drive table range");
    if (std::abs(p.carrier - tab->omega_drive) > table_window)
      throw ConfigError("RotatingFrameModel: fg-ge carrier too far from the drive-table frequency");
    const int fg = index(2, 0), ge = index(0, 1);
    const int k = static_cast<int>(c.pairs.size());
    c.pairs.push_back({fg, ge});
    const double nu = p.carrier + wq_[1] - 2.0 * wq_[0];
    const double phase = p.phase - 2.0 * frame[Transmon::A] + frame[Transmon::B];
    const double scale = p.omega / tab->amplitude_max;
    c.segments.push_back({start, start + p.duration(), true, [=](double t, RVec& shift, CVec& coupling) {
                            const double s = scale * p.shape(t - start);
                            shift += tab->shift_at(s);
                            coupling[k] += tab->g_at(s) * std::exp(cplx(0.0, phase - nu * t));
                          }});
  }

  void add_drag(CompiledSchedule& c, double start, const DragPulse& p, const FrameTracker& frame) const {
    const Transmon q = p.target;
    const int L = levels(q);
    if (p.transition == Transition::EF && L < 3) throw ConfigError("RotatingFrameModel: ef pulse needs three levels");
    const double lam = matrix_element(q, p.transition == Transition::GE ? 0 : 1);
    const double alpha = p.transition == Transition::GE ? anharmonicity(q) : -anharmonicity(q);
    const double delta = transition_frequency(q, p.transition) + p.detuning - qubit_frequency(q);
    const double axis = p.axis - frame[q];
    std::vector<std::pair<int, double>> slots;  // pair index, matrix element
    for (int i = 0; i < dim(); ++i) {
      const int k = level(q, i);
      if (k + 1 >= L) continue;
      const int up = q == Transmon::A ? i + lb_ : i + 1;
      slots.emplace_back(static_cast<int>(c.pairs.size()), matrix_element(q, k));
      c.pairs.push_back({up, i});
    }
    c.segments.push_back({start, start + p.duration(), false, [=](double t, RVec&, CVec& coupling) {
                            const double u = t - start;
                            const cplx eps(p.in_phase(u, lam), p.quadrature(u, lam, alpha));
                            const cplx f = 0.5 * eps * std::exp(cplx(0.0, axis - delta * t));
                            for (const auto& [k, m] : slots) coupling[k] += m * f;
                          }});
  }

  device::DeviceParams device_;
  std::shared_ptr<const device::StaticSystem> statics_;
  int la_;
  int lb_;
  std::array<double, 2> wq_{};
  std::array<double, 2> ef_{};
  std::array<std::vector<double>, 2> lambda_;
  RVec h_;
  std::shared_ptr<const floquet::DriveTable> table_;
};

}  // namespace fgge::pulse
