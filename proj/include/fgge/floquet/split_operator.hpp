#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "fgge/device/static_system.hpp"
#include "fgge/numerics/linalg.hpp"

namespace fgge::floquet {

// Real symmetric drive operator stored through its eigendecomposition so that
// exp(-i c D) is a pair of real products around a diagonal phase.
struct DiagonalizedOperator {
  RMat vectors;
  RVec values;

  static DiagonalizedOperator from(const RMat& op) {
    const auto e = numerics::symmetric_eigendecomposition(op, 1e-9);
    return {e.vectors, e.values};
  }

};

// Fourth-order (Yoshida) composition of symmetric Strang splittings for
// H(t) = diag(E) + sum_k f_k(t) D_k, in a basis where the static part is
// diagonal. Every factor is exactly unitary.
class SplitOperatorStepper {
 public:
  SplitOperatorStepper(RVec energies, std::vector<RMat> drive_ops) : energies_(std::move(energies)) {
    for (const auto& d : drive_ops) {
      drives_.push_back(DiagonalizedOperator::from(d));
      drives_t_.push_back(RMat(drives_.back().vectors.transpose()));
    }
  }

  int dim() const { return static_cast<int>(energies_.size()); }
  std::size_t drive_count() const { return drives_.size(); }

  // Advance x (vector or matrix of column states) from t to t + h.
  // fields(t, k) returns the coefficient of drive operator k.
  template <class X, class Fields>
  void step(X& x, double t, double h, const Fields& fields) const {
    static const double w1 = 1.0 / (2.0 - std::cbrt(2.0));
    static const double w0 = -std::cbrt(2.0) / (2.0 - std::cbrt(2.0));
    strang(x, t, w1 * h, fields);
    strang(x, t + w1 * h, w0 * h, fields);
    strang(x, t + (w1 + w0) * h, w1 * h, fields);
  }

  template <class X, class Fields>
  void evolve(X& x, double t0, double t1, long steps, const Fields& fields) const {
    const double h = (t1 - t0) / static_cast<double>(steps);
    for (long n = 0; n < steps; ++n) step(x, t0 + static_cast<double>(n) * h, h, fields);
  }

 private:
  template <class X>
  void free_phase(X& x, double h) const {
    for (Eigen::Index k = 0; k < energies_.size(); ++k) x.row(k) *= std::exp(cplx(0.0, -energies_[k] * h));
  }

  template <class X>
  void drive_exp(X& x, std::size_t k, double c) const {
    const auto& d = drives_[k];
    X y = numerics::real_times_complex(drives_t_[k], x);
    for (Eigen::Index i = 0; i < d.values.size(); ++i) y.row(i) *= std::exp(cplx(0.0, -c * d.values[i]));
    x = numerics::real_times_complex(d.vectors, y);
  }

  template <class X, class Fields>
  void strang(X& x, double t, double h, const Fields& fields) const {
    const double tm = t + 0.5 * h;
    free_phase(x, 0.5 * h);
    const std::size_t n = drives_.size();
    if (n == 1) {
      drive_exp(x, 0, fields(tm, std::size_t{0}) * h);
    } else {
      for (std::size_t k = 0; k < n; ++k) drive_exp(x, k, fields(tm, k) * 0.5 * h);
      for (std::size_t k = n; k-- > 0;) drive_exp(x, k, fields(tm, k) * 0.5 * h);
    }
    free_phase(x, 0.5 * h);
  }

  RVec energies_;
  std::vector<DiagonalizedOperator> drives_;
  std::vector<RMat> drives_t_;
};

// Drive operator of the static system expressed in its dressed basis.
inline RMat dressed_operator(const device::StaticSystem& sys, const RMat& op) {
  const RMat& v = sys.dressed_vectors();
  RMat d = v.transpose() * op * v;
  return 0.5 * (d + d.transpose());
}

}  // namespace fgge::floquet
