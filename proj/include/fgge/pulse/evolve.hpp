#pragma once

#include <cmath>
#include <sstream>
#include <vector>

#include "fgge/core/errors.hpp"
#include "fgge/core/units.hpp"
#include "fgge/numerics/linalg.hpp"
#include "fgge/numerics/ode.hpp"
#include "fgge/pulse/collapse.hpp"
#include "fgge/pulse/model.hpp"

namespace fgge::pulse {

struct EvolveOptions {
  double dt = units::ns(0.025);
  double norm_tolerance = 1e-8;   // closed evolution
  double trace_tolerance = 1e-6;  // open evolution
  int max_refinements = 2;
  unsigned workers = 1;
};

// Lindblad dissipator restricted to operators whose L^dag L is diagonal:
// per-level decay ladders (with the spectator untouched) and diagonal
// dephasing. Stored as a damping matrix plus sparse jump entries.
class OpenSystem {
 public:
  struct Entry {
    int row;
    int col;
    double weight;
  };

  OpenSystem() = default;
  OpenSystem(const RotatingFrameModel& m, const CollapseSet& c) {
    const int n = m.dim();
    RVec out = RVec::Zero(n);
    damping_ = RMat::Zero(n, n);
    for (const auto& d : c.decay) {
      if (d.rate == 0.0 || d.level >= m.levels(d.target)) continue;
      if (d.rate < 0.0) throw ConfigError("CollapseSet: negative decay rate");
      std::vector<Entry> op;
      for (int i = 0; i < n; ++i)
        if (m.level(d.target, i) == d.level) {
          const int j = d.target == Transmon::A ? i - m.levels_b() : i - 1;
          op.push_back({j, i, std::sqrt(d.rate)});
          out[i] += d.rate;
        }
      jumps_.push_back(std::move(op));
    }
    for (const auto& d : c.dephasing) {
      if (d.rate == 0.0 || d.level >= m.levels(d.target)) continue;
      if (d.rate < 0.0) throw ConfigError("CollapseSet: negative dephasing rate");
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if ((m.level(d.target, i) == d.level) != (m.level(d.target, j) == d.level)) damping_(i, j) += d.rate;
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) damping_(i, j) += 0.5 * (out[i] + out[j]);
  }

  bool empty() const { return jumps_.empty() && (damping_.size() == 0 || damping_.isZero(0.0)); }
  const RMat& damping() const { return damping_; }
  const std::vector<std::vector<Entry>>& jumps() const { return jumps_; }

 private:
  RMat damping_;
  std::vector<std::vector<Entry>> jumps_;
};

// Fixed-step RK4 in the interaction picture of the static energies and the
// accumulated drive shifts, so the integrator only sees the couplings.
// Phases and couplings are tabulated on the half-step grid once and shared
// by every state propagated through the same schedule.
class SchedulePropagation {
 public:
  SchedulePropagation(const CompiledSchedule& c, double dt) : c_(c) {
    n_ = c.dim();
    steps_ = c.duration > 0.0 ? std::max<long>(1, static_cast<long>(std::ceil(c.duration / dt - 1e-9))) : 0;
    h_ = steps_ > 0 ? c.duration / static_cast<double>(steps_) : 0.0;
    const long nodes = 2 * steps_ + 1;
    const bool any_shift = [&] {
      for (const auto& s : c.segments)
        if (s.has_shift) return true;
      return false;
    }();
    RVec phi = RVec::Zero(n_), s(n_);
    theta_end_ = RVec::Zero(n_);
    coupling_.resize(nodes);
    u_.resize(nodes);
    static const double gx[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)}, gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    CVec cpl;
    for (long m = 0; m < nodes; ++m) {
      const double t = 0.5 * h_ * static_cast<double>(m);
      if (m > 0 && any_shift) {
        const double a = t - 0.5 * h_, half = 0.25 * h_;
        for (int k = 0; k < 3; ++k) {
          c.shifts(a + half * (1.0 + gx[k]), s);
          phi += half * gw[k] * s;
        }
      }
      const RVec theta = c.static_energy * t + phi;
      u_[m] = (cplx(0.0, 1.0) * theta.cast<cplx>()).array().exp();
      c.couplings(t, cpl);
      CVec v(cpl.size());
      for (std::size_t k = 0; k < c.pairs.size(); ++k)
        v[k] = cpl[k] * u_[m][c.pairs[k].upper] * std::conj(u_[m][c.pairs[k].lower]);
      coupling_[m] = v;
      if (m == nodes - 1) theta_end_ = theta;
    }
  }

  long steps() const { return steps_; }
  double step() const { return h_; }

  CVec evolve(CVec psi) const {
    for (long s = 0; s < steps_; ++s) {
      const long m = 2 * s;
      const CVec k1 = rhs(psi, m);
      const CVec k2 = rhs(CVec(psi + 0.5 * h_ * k1), m + 1);
      const CVec k3 = rhs(CVec(psi + 0.5 * h_ * k2), m + 1);
      const CVec k4 = rhs(CVec(psi + h_ * k3), m + 2);
      psi += (h_ / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return to_frame(psi);
  }

  // Jump amplitudes in the interaction picture, per grid node and in the
  // order of os.jumps() flattened.
  std::vector<CVec> jump_weights(const OpenSystem& os) const {
    std::vector<CVec> w(u_.size());
    std::size_t count = 0;
    for (const auto& op : os.jumps()) count += op.size();
    for (std::size_t m = 0; m < u_.size(); ++m) {
      w[m].resize(static_cast<Eigen::Index>(count));
      Eigen::Index k = 0;
      for (const auto& op : os.jumps())
        for (const auto& a : op) w[m][k++] = a.weight * u_[m][a.row] * std::conj(u_[m][a.col]);
    }
    return w;
  }

  CMat evolve(CMat rho, const OpenSystem& os) const { return evolve(std::move(rho), os, jump_weights(os)); }

  CMat evolve(CMat rho, const OpenSystem& os, const std::vector<CVec>& weights) const {
    CMat k1(n_, n_), k2(n_, n_), k3(n_, n_), k4(n_, n_), tmp(n_, n_);
    for (long s = 0; s < steps_; ++s) {
      const long m = 2 * s;
      rhs(rho, m, os, weights, k1);
      tmp = rho + 0.5 * h_ * k1;
      rhs(tmp, m + 1, os, weights, k2);
      tmp = rho + 0.5 * h_ * k2;
      rhs(tmp, m + 1, os, weights, k3);
      tmp = rho + h_ * k3;
      rhs(tmp, m + 2, os, weights, k4);
      rho += (h_ / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return to_frame(rho, os);
  }

 private:
  CVec rhs(const CVec& psi, long m) const {
    CVec d = CVec::Zero(n_);
    const CVec& v = coupling_[m];
    for (std::size_t k = 0; k < c_.pairs.size(); ++k) {
      const auto [r, c] = c_.pairs[k];
      d[r] += v[k] * psi[c];
      d[c] += std::conj(v[k]) * psi[r];
    }
    return cplx(0.0, -1.0) * d;
  }

  void rhs(const CMat& rho, long m, const OpenSystem& os, const std::vector<CVec>& weights, CMat& d) const {
    const CVec& v = coupling_[m];
    const cplx mi(0.0, -1.0);
    if (os.damping().size() > 0) d = -(os.damping().array().cast<cplx>() * rho.array()).matrix();
    else d.setZero();
    // -i [V, rho] with V = sum_k v_k |r><c| + h.c.
    for (std::size_t k = 0; k < c_.pairs.size(); ++k) {
      const auto [r, c] = c_.pairs[k];
      const cplx x = mi * v[k], xc = mi * std::conj(v[k]);
      for (int j = 0; j < n_; ++j) {
        d(r, j) += x * rho(c, j);
        d(c, j) += xc * rho(r, j);
      }
      for (int i = 0; i < n_; ++i) {
        d(i, c) -= x * rho(i, r);
        d(i, r) -= xc * rho(i, c);
      }
    }
    const CVec& w = weights[m];
    Eigen::Index base = 0;
    for (const auto& op : os.jumps()) {
      const auto len = static_cast<Eigen::Index>(op.size());
      for (Eigen::Index a = 0; a < len; ++a) {
        const cplx wa = w[base + a];
        for (Eigen::Index b = 0; b < len; ++b)
          d(op[a].row, op[b].row) += wa * std::conj(w[base + b]) * rho(op[a].col, op[b].col);
      }
      base += len;
    }
  }

  CVec to_frame(const CVec& psi) const {
    CVec out(n_);
    for (int i = 0; i < n_; ++i) out[i] = psi[i] * std::exp(cplx(0.0, c_.final_phase[i] - theta_end_[i]));
    return out;
  }
  CMat to_frame(const CMat& rho, const OpenSystem&) const {
    CVec p(n_);
    for (int i = 0; i < n_; ++i) p[i] = std::exp(cplx(0.0, c_.final_phase[i] - theta_end_[i]));
    return p.asDiagonal() * rho * p.conjugate().asDiagonal();
  }

  const CompiledSchedule& c_;
  int n_ = 0;
  long steps_ = 0;
  double h_ = 0.0;
  std::vector<CVec> coupling_;
  std::vector<CVec> u_;
  RVec theta_end_;
};

inline CVec schrodinger_evolve(const RotatingFrameModel& model, const PulseSchedule& sched, const CVec& psi0,
                               const EvolveOptions& opt = {}) {
  if (psi0.size() != model.dim()) throw ConfigError("schrodinger_evolve: state dimension mismatch");
  const double n0 = psi0.norm();
  if (std::abs(n0 - 1.0) > 1e-10) throw ConfigError("schrodinger_evolve: initial state not normalized");
  const auto compiled = model.compile(sched);
  std::ostringstream trace;
  double dt = opt.dt;
  for (int attempt = 0; attempt <= opt.max_refinements; ++attempt, dt *= 0.5) {
    const SchedulePropagation prop(compiled, dt);
    CVec out = prop.evolve(psi0);
    const double drift = std::abs(out.norm() - n0);
    if (!numerics::all_finite(out)) throw NumericalError("schrodinger_evolve: non-finite state");
    if (drift <= opt.norm_tolerance) return out;
    trace << " dt=" << units::to_ns(dt) << "ns drift=" << drift;
  }
  throw NumericalError("schrodinger_evolve: norm tolerance not met;" + trace.str());
}

// Columns of the qubit-frame propagator for the listed initial basis states.
inline CMat evolve_basis(const RotatingFrameModel& model, const PulseSchedule& sched, const std::vector<int>& inputs,
                         const EvolveOptions& opt = {}) {
  const auto compiled = model.compile(sched);
  const SchedulePropagation prop(compiled, opt.dt);
  CMat U(model.dim(), static_cast<Eigen::Index>(inputs.size()));
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    CVec e = CVec::Zero(model.dim());
    e[inputs[k]] = 1.0;
    U.col(static_cast<Eigen::Index>(k)) = prop.evolve(e);
    if (std::abs(U.col(static_cast<Eigen::Index>(k)).norm() - 1.0) > opt.norm_tolerance)
      throw NumericalError("evolve_basis: norm tolerance not met at dt=" + std::to_string(units::to_ns(opt.dt)) + " ns");
  }
  return U;
}

inline CMat lindblad_evolve(const RotatingFrameModel& model, const PulseSchedule& sched, const CMat& rho0,
                            const CollapseSet& collapse, const EvolveOptions& opt = {}) {
  if (rho0.rows() != model.dim() || rho0.cols() != model.dim())
    throw ConfigError("lindblad_evolve: state dimension mismatch");
  if (numerics::max_abs(CMat(rho0 - rho0.adjoint())) > 1e-10) throw ConfigError("lindblad_evolve: rho0 not Hermitian");
  if (std::abs(rho0.trace().real() - 1.0) > 1e-10) throw ConfigError("lindblad_evolve: rho0 trace is not 1");
  const auto compiled = model.compile(sched);
  const OpenSystem os(model, collapse);
  std::ostringstream trace;
  double dt = opt.dt;
  for (int attempt = 0; attempt <= opt.max_refinements; ++attempt, dt *= 0.5) {
    const SchedulePropagation prop(compiled, dt);
    CMat out = prop.evolve(rho0, os);
    out = 0.5 * (out + out.adjoint()).eval();
    if (!numerics::all_finite(out)) throw NumericalError("lindblad_evolve: non-finite state");
    const double tr = std::abs(out.trace().real() - 1.0);
    const double min_eig = numerics::hermitian_eigendecomposition(out).values.minCoeff();
    if (tr <= opt.trace_tolerance && min_eig > -1e-6) return out;
    trace << " dt=" << units::to_ns(dt) << "ns trace_err=" << tr << " min_eig=" << min_eig;
  }
  throw NumericalError("lindblad_evolve: positivity or trace tolerance not met;" + trace.str());
}

}  // namespace fgge::pulse
