#pragma once

#include <cmath>
#include <fstream>
#include <iomanip>
#include <string>
#include <vector>

#include "fgge/core/errors.hpp"
#include "fgge/core/parallel.hpp"
#include "fgge/numerics/linalg.hpp"
#include "fgge/pulse/evolve.hpp"

namespace fgge::pulse {

// Superoperator on column-stacked density matrices: vec(rho)[i + n j] = rho(i, j).
struct QuantumChannel {
  int n = 0;
  CMat S;

  static QuantumChannel identity(int n) { return {n, CMat::Identity(n * n, n * n)}; }
  static QuantumChannel unitary(const CMat& U) {
    const int n = static_cast<int>(U.rows());
    CMat S(n * n, n * n);
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) S.block(j * n, l * n, n, n) = std::conj(U(j, l)) * U;
    return {n, S};
  }

  CMat apply(const CMat& rho) const {
    const CVec v = S * Eigen::Map<const CVec>(rho.data(), rho.size());
    return Eigen::Map<const CMat>(v.data(), n, n);
  }
  // this after first
  QuantumChannel after(const QuantumChannel& first) const { return {n, S * first.S}; }

  double trace_preservation_error() const {
    double e = 0.0;
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        cplx tr = 0.0;
        for (int i = 0; i < n; ++i) tr += S(i + n * i, j + n * l);
        e = std::max(e, std::abs(tr - (j == l ? 1.0 : 0.0)));
      }
    return e;
  }

  CMat choi() const {
    CMat C = CMat::Zero(n * n, n * n);
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l)
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) C(j * n + a, l * n + b) = S(a + n * b, j + n * l);
    return C;
  }
  double choi_min_eigenvalue() const {
    const CMat C = choi();
    return numerics::hermitian_eigendecomposition(CMat(0.5 * (C + C.adjoint()))).values.minCoeff();
  }

  void write_csv(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write channel CSV to " + path);
    f << "row,col,re,im\n" << std::setprecision(17);
    for (Eigen::Index i = 0; i < S.rows(); ++i)
      for (Eigen::Index j = 0; j < S.cols(); ++j)
        if (S(i, j) != cplx(0.0)) f << i << ',' << j << ',' << S(i, j).real() << ',' << S(i, j).imag() << '\n';
  }
};

// Propagates every |i><j| (i <= j, the rest by Hermiticity). Without
// decoherence the closed propagator is used instead.
inline QuantumChannel channel_from_schedule(const RotatingFrameModel& model, const PulseSchedule& sched,
                                            const CollapseSet& collapse, const EvolveOptions& opt = {}) {
  const int n = model.dim();
  const auto compiled = model.compile(sched);
  const OpenSystem os(model, collapse);
  const SchedulePropagation prop(compiled, opt.dt);
  if (os.empty()) {
    CMat U(n, n);
    for (int k = 0; k < n; ++k) {
      CVec e = CVec::Zero(n);
      e[k] = 1.0;
      U.col(k) = prop.evolve(e);
    }
    if (numerics::unitarity_error(U) > opt.norm_tolerance * 10)
      throw NumericalError("channel_from_schedule: closed propagator not unitary");
    return QuantumChannel::unitary(U);
  }
  std::vector<std::pair<int, int>> jobs;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) jobs.emplace_back(i, j);
  const auto weights = prop.jump_weights(os);
  const auto cols = parallel_map(jobs.size(), opt.workers, [&](std::size_t k) {
    CMat e = CMat::Zero(n, n);
    e(jobs[k].first, jobs[k].second) = 1.0;
    return prop.evolve(e, os, weights);
  });
  QuantumChannel ch{n, CMat(n * n, n * n)};
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const auto [i, j] = jobs[k];
    ch.S.col(i + n * j) = Eigen::Map<const CVec>(cols[k].data(), n * n);
    if (i != j) {
      const CMat t = cols[k].adjoint();
      ch.S.col(j + n * i) = Eigen::Map<const CVec>(t.data(), n * n);
    }
  }
  const double tp = ch.trace_preservation_error();
  if (tp > opt.trace_tolerance) throw NumericalError("channel_from_schedule: trace preservation error " + std::to_string(tp));
  return ch;
}

struct GateFidelity {
  double average = 0.0;     // (d F_pro + retained) / (d + 1)
  double process = 0.0;     // entanglement fidelity on the subspace
  double retained = 0.0;    // mean population left in the subspace
  double leakage() const { return 1.0 - retained; }
};

// Fidelity of the channel restricted to the subspace spanned by `subspace`
// against `target` (d x d) on that subspace. Population leaving the subspace
// counts as loss.
inline GateFidelity average_gate_fidelity(const QuantumChannel& ch, const std::vector<int>& subspace, const CMat& target) {
  const int d = static_cast<int>(subspace.size());
  if (target.rows() != d || target.cols() != d) throw ConfigError("average_gate_fidelity: target dimension mismatch");
  const int n = ch.n;
  GateFidelity f;
  cplx pro = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const CVec col = ch.S.col(subspace[i] + n * subspace[j]);
      // <U e_i| Phi(|e_i><e_j|) |U e_j>
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          pro += std::conj(target(a, i)) * col[subspace[a] + n * subspace[b]] * target(b, j);
      if (i == j)
        for (int a = 0; a < d; ++a) f.retained += col[subspace[a] + n * subspace[a]].real();
    }
  f.process = pro.real() / (d * d);
  f.retained /= d;
  f.average = (d * f.process + f.retained) / (d + 1);
  return f;
}

inline CMat ideal_cz() {
  CMat U = CMat::Identity(4, 4);
  U(3, 3) = -1.0;
  return U;
}

}  // namespace fgge::pulse
