#pragma once

#include <cmath>
#include <stdexcept>

#include "fgge/core/units.hpp"
#include "fgge/numerics/linalg.hpp"

namespace fgge::device {

struct ChargeBasisOperators {
  RMat n_op;
  RMat cos_phi_op;
  int n_cutoff = 0;
  int dim() const { return 2 * n_cutoff + 1; }
};

inline ChargeBasisOperators charge_basis_operators(int n_cutoff) {
  if (n_cutoff < 1) throw std::invalid_argument("charge_basis_operators: n_cutoff must be positive");
  const int d = 2 * n_cutoff + 1;
  ChargeBasisOperators ops{RMat::Zero(d, d), RMat::Zero(d, d), n_cutoff};
  for (int k = 0; k < d; ++k) {
    ops.n_op(k, k) = static_cast<double>(k - n_cutoff);
    if (k + 1 < d) {
      ops.cos_phi_op(k, k + 1) = 0.5;
      ops.cos_phi_op(k + 1, k) = 0.5;
    }
  }
  return ops;
}

struct TransmonSpectrum {
  RVec energies;   // relative to the ground state, rad/s
  RMat vectors;    // charge-basis amplitudes, one column per level
  RMat n_matrix;   // charge operator between kept levels, n(k, k+1) > 0
  double n01() const { return n_matrix(0, 1); }
  int levels() const { return static_cast<int>(energies.size()); }
};

inline RMat transmon_charge_hamiltonian(double E_C, double E_J, int n_cutoff) {
  const auto ops = charge_basis_operators(n_cutoff);
  return 4.0 * E_C * ops.n_op * ops.n_op - E_J * ops.cos_phi_op;
}

// Lowest `levels` eigenstates of 4 E_C n^2 - E_J cos(phi) at zero offset charge.
inline TransmonSpectrum diagonalize_transmon(double E_C, double E_J, int n_cutoff, int levels) {
  const int d = 2 * n_cutoff + 1;
  if (levels < 1 || levels > d) throw std::invalid_argument("diagonalize_transmon: bad level count");
  const auto ops = charge_basis_operators(n_cutoff);
  const auto eig = numerics::symmetric_eigendecomposition(4.0 * E_C * ops.n_op * ops.n_op - E_J * ops.cos_phi_op);
  TransmonSpectrum s;
  s.energies = eig.values.head(levels).array() - eig.values[0];
  s.vectors = eig.vectors.leftCols(levels);
  for (int k = 1; k < levels; ++k) {
    const double nk = s.vectors.col(k - 1).dot(ops.n_op * s.vectors.col(k));
    if (nk < 0.0) s.vectors.col(k) *= -1.0;
  }
  s.n_matrix = s.vectors.transpose() * ops.n_op * s.vectors;
  s.n_matrix = 0.5 * (s.n_matrix + s.n_matrix.transpose()).eval();
  return s;
}

struct TransmonEnergyFit {
  double E_C = 0.0;
  double E_J = 0.0;
  double residual_omega = 0.0;  // rad/s
  double residual_alpha = 0.0;  // rad/s
  int iterations = 0;
  bool converged = false;
  bool transmon_regime = true;  // E_J/E_C >= 10
};

// Newton solve for (E_C, E_J) reproducing (omega_ge, alpha). Internally in
// GHz so the Jacobian is well scaled.
inline TransmonEnergyFit fit_transmon_energies(double omega_ge, double alpha, int n_cutoff = 15) {
  if (!(omega_ge > 0.0)) throw std::invalid_argument("fit_transmon_energies: omega_ge must be positive");
  if (!(alpha < 0.0)) throw std::invalid_argument("fit_transmon_energies: alpha must be negative");
  const double w = units::to_ghz(omega_ge), a = units::to_ghz(alpha);
  auto residual = [&](double ec, double ej) {
    const auto s = diagonalize_transmon(ec, ej, n_cutoff, 3);
    Eigen::Vector2d r;
    r << s.energies[1] - w, (s.energies[2] - 2.0 * s.energies[1]) - a;
    return r;
  };
  double ec = -a;
  double ej = (w + ec) * (w + ec) / (8.0 * ec);
  TransmonEnergyFit fit;
  Eigen::Vector2d r = residual(ec, ej);
  const double tol = 1e-11;  // GHz, i.e. 0.01 Hz
  for (int it = 0; it < 60 && r.cwiseAbs().maxCoeff() > tol; ++it) {
    fit.iterations = it + 1;
    Eigen::Matrix2d jac;
    const double hc = 1e-7 * ec, hj = 1e-7 * ej;
    jac.col(0) = (residual(ec + hc, ej) - residual(ec - hc, ej)) / (2.0 * hc);
    jac.col(1) = (residual(ec, ej + hj) - residual(ec, ej - hj)) / (2.0 * hj);
    const Eigen::Vector2d step = jac.fullPivLu().solve(-r);
    double t = 1.0;
    for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
      const double ec_new = ec + t * step[0], ej_new = ej + t * step[1];
      if (ec_new <= 0.0 || ej_new <= 0.0) continue;
      const Eigen::Vector2d rn = residual(ec_new, ej_new);
      if (rn.norm() < r.norm() || ls == 29) {
        ec = ec_new;
        ej = ej_new;
        r = rn;
        break;
      }
    }
  }
  fit.E_C = units::ghz(ec);
  fit.E_J = units::ghz(ej);
  fit.residual_omega = units::ghz(r[0]);
  fit.residual_alpha = units::ghz(r[1]);
  fit.converged = std::abs(fit.residual_omega) < units::khz(1.0) && std::abs(fit.residual_alpha) < units::khz(1.0);
  fit.transmon_regime = ej / ec >= 10.0;
  return fit;
}

}  // namespace fgge::device
