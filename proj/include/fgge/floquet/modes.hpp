#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "fgge/core/units.hpp"
#include "fgge/device/static_system.hpp"
#include "fgge/numerics/linalg.hpp"

namespace fgge::floquet {

struct FloquetMode {
  double quasienergy = 0.0;  // rad/s, folded into (-omega/2, omega/2]
  CVec vector;               // state at t = 0 in the dressed static basis
  int bare_label = -1;
  double overlap = 0.0;      // |<bare|mode>|^2
};

struct FloquetSpectrum {
  std::vector<FloquetMode> modes;
  double omega = 0.0;
  bool near_degenerate = false;
};

inline double fold_quasienergy(double e, double omega) {
  double f = std::remainder(e, omega);
  if (f <= -0.5 * omega) f += omega;
  return f;
}

// Eigenmodes of a one-period propagator. The complex Schur form of a normal
// matrix is diagonal, so its unitary factor gives orthonormal modes even
// when eigenvalues nearly coincide.
inline FloquetSpectrum floquet_modes(const CMat& U, double period) {
  const double omega = units::two_pi / period;
  Eigen::ComplexSchur<CMat> schur(U);
  const CMat& q = schur.matrixU();
  const CMat& t = schur.matrixT();
  const int n = static_cast<int>(U.rows());
  FloquetSpectrum s;
  s.omega = omega;
  s.modes.resize(n);
  RMat weights(n, n);  // label x mode
  for (int j = 0; j < n; ++j) {
    s.modes[j].quasienergy = fold_quasienergy(-std::arg(t(j, j)) / period, omega);
    s.modes[j].vector = q.col(j);
    for (int i = 0; i < n; ++i) weights(i, j) = std::norm(q(i, j));
  }
  const auto label_to_mode = device::assign_by_overlap(weights);
  for (int i = 0; i < n; ++i) {
    const int j = label_to_mode[i];
    s.modes[j].bare_label = i;
    s.modes[j].overlap = weights(i, j);
  }
  for (const auto& m : s.modes)
    if (m.overlap < 0.5) s.near_degenerate = true;
  return s;
}

// Reorders `modes` so that entry i continues reference vector i, by greedy
// maximal overlap.
inline std::vector<int> track_modes(const std::vector<CVec>& reference, const FloquetSpectrum& s) {
  const int n = static_cast<int>(reference.size());
  const int m = static_cast<int>(s.modes.size());
  RMat w = RMat::Zero(std::max(n, m), std::max(n, m));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) w(i, j) = std::norm(reference[i].dot(s.modes[j].vector));
  auto a = device::assign_by_overlap(w);
  a.resize(n);
  return a;
}

}  // namespace fgge::floquet
