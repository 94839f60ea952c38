#pragma once

#include <cmath>
#include <cstddef>

#include "fgge/core/errors.hpp"
#include "fgge/device/drive.hpp"
#include "fgge/device/params.hpp"
#include "fgge/device/static_system.hpp"
#include "fgge/device/transmon.hpp"

namespace fgge::device {

// H(t) = H0 + Omega cos(omega t + phase) n_target / n01_target on the
// truncated product eigenbasis.
inline RMat build_lab_hamiltonian(const StaticSystem& sys, const DriveSpec& drive, double t) {
  return sys.h0() + drive.field(t) * sys.drive_operator();
}

// Same Hamiltonian on the full tensor-product charge basis.
inline RMat build_charge_basis_hamiltonian(const DeviceParams& d, const DriveSpec& drive, double t,
                                           std::size_t max_dim = 4096) {
  const int da = 2 * d.qubit_a.n_cutoff + 1, db = 2 * d.qubit_b.n_cutoff + 1;
  if (static_cast<std::size_t>(da) * static_cast<std::size_t>(db) > max_dim)
    throw ConfigError("build_charge_basis_hamiltonian: dimension exceeds configured maximum");
  const auto oa = charge_basis_operators(d.qubit_a.n_cutoff);
  const auto ob = charge_basis_operators(d.qubit_b.n_cutoff);
  const RMat ha = transmon_charge_hamiltonian(d.qubit_a.E_C, d.qubit_a.E_J, d.qubit_a.n_cutoff);
  const RMat hb = transmon_charge_hamiltonian(d.qubit_b.E_C, d.qubit_b.E_J, d.qubit_b.n_cutoff);
  const RMat ia = RMat::Identity(da, da), ib = RMat::Identity(db, db);
  RMat h = StaticSystem::kron(ha, ib) + StaticSystem::kron(ia, hb) + d.J_tilde * StaticSystem::kron(oa.n_op, ob.n_op);
  if (drive.amplitude != 0.0) {
    const bool on_a = d.drive_target == DriveTarget::A;
    const double n01 = (on_a ? d.qubit_a : d.qubit_b).spectrum(2).n01();
    const RMat op = on_a ? StaticSystem::kron(oa.n_op, ib) : StaticSystem::kron(ia, ob.n_op);
    h += drive.field(t) / n01 * op;
  }
  return RMat(0.5 * (h + h.transpose()));
}

inline RMat lowering_operator(int levels) {
  RMat a = RMat::Zero(levels, levels);
  for (int k = 1; k < levels; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

// Two coupled Kerr oscillators with exchange J(a^dag b + a b^dag) and a
// lab-frame drive Omega cos(omega t + phase)(a + a^dag) on the target.
inline RMat build_ladder_hamiltonian(const DeviceParams& d, const DriveSpec& drive, double t, int levels_a,
                                     int levels_b, std::size_t max_dim = 4096) {
  if (levels_a < 2 || levels_b < 2) throw ConfigError("build_ladder_hamiltonian: need at least two levels");
  if (static_cast<std::size_t>(levels_a) * static_cast<std::size_t>(levels_b) > max_dim)
    throw ConfigError("build_ladder_hamiltonian: dimension exceeds configured maximum");
  const RMat a = lowering_operator(levels_a), b = lowering_operator(levels_b);
  const RMat ia = RMat::Identity(levels_a, levels_a), ib = RMat::Identity(levels_b, levels_b);
  auto kerr = [](const TransmonParams& p, const RMat& op) {
    const RMat n = op.transpose() * op;
    return RMat(p.omega_ge * n + 0.5 * p.alpha * (n * n - n));
  };
  const RMat A = StaticSystem::kron(a, ib), B = StaticSystem::kron(ia, b);
  RMat h = StaticSystem::kron(kerr(d.qubit_a, a), ib) + StaticSystem::kron(ia, kerr(d.qubit_b, b)) +
           d.J * (A.transpose() * B + A * B.transpose());
  if (drive.amplitude != 0.0) {
    const RMat& op = d.drive_target == DriveTarget::A ? A : B;
    h += drive.field(t) * (op + op.transpose());
  }
  return RMat(0.5 * (h + h.transpose()));
}

inline RMat build_ladder_hamiltonian(const DeviceParams& d, const DriveSpec& drive, double t, int levels) {
  return build_ladder_hamiltonian(d, drive, t, levels, levels);
}

}  // namespace fgge::device
