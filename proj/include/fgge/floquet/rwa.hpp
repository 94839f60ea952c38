#pragma once

#include <cmath>
#include <vector>

#include "fgge/device/hamiltonian.hpp"
#include "fgge/device/params.hpp"
#include "fgge/device/static_system.hpp"
#include "fgge/floquet/spectroscopy.hpp"
#include "fgge/numerics/linalg.hpp"

namespace fgge::floquet {

enum class RwaBasis {
  Dressed,   // exact static eigenstates, drive truncated in that basis
  Transmon,  // isolated-transmon levels, coupling truncated as well
  Duffing,   // harmonic ladder operators with Kerr anharmonicity
};

// Time-independent Hamiltonian in the frame rotating at omega for both
// transmons. Only drive terms changing the total excitation by one, i.e. the
// co-rotating part (Omega/2)(a + a^dag), are kept. In the Transmon and
// Duffing bases the coupling is also restricted to excitation-conserving
// terms, which moves the statics away from the exact ones.
class RwaModel {
 public:
  RwaModel(const device::DeviceParams& d, int levels_a = 6, int levels_b = 4, RwaBasis basis = RwaBasis::Dressed)
      : levels_a_(levels_a), levels_b_(levels_b) {
    const int n = dim();
    RVec number(n);
    for (int a = 0; a < levels_a; ++a)
      for (int b = 0; b < levels_b; ++b) number[index(a, b)] = a + b;
    number_ = number.asDiagonal();
    const bool on_a = d.drive_target == device::DriveTarget::A;
    if (basis == RwaBasis::Duffing) {
      static_ = device::build_ladder_hamiltonian(d, DriveSpec{0.0, 1.0, 0.0}, 0.0, levels_a, levels_b);
      const RMat a = device::lowering_operator(levels_a), b = device::lowering_operator(levels_b);
      const RMat op = on_a ? device::StaticSystem::kron(a, RMat::Identity(levels_b, levels_b))
                           : device::StaticSystem::kron(RMat::Identity(levels_a, levels_a), b);
      drive_ = op + op.transpose();
    } else if (basis == RwaBasis::Dressed) {
      const device::StaticSystem sys(d, levels_a, levels_b);
      static_ = sys.dressed_energies().asDiagonal();
      drive_ = dressed_operator(sys, sys.drive_operator());
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (std::abs(number[i] - number[j]) != 1.0) drive_(i, j) = 0.0;
    } else {
      const device::StaticSystem sys(d, levels_a, levels_b);
      static_ = sys.h0();
      drive_ = sys.drive_operator();
      // Keep coupling terms with unchanged total excitation and drive terms
      // changing the driven transmon by exactly one level.
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (i != j && number[i] != number[j]) static_(i, j) = 0.0;
          const int di = on_a ? i / levels_b : i % levels_b, dj = on_a ? j / levels_b : j % levels_b;
          if (std::abs(di - dj) != 1) drive_(i, j) = 0.0;
        }
    }
    const auto e = numerics::symmetric_eigendecomposition(static_);
    const auto label_to_col = device::assign_by_overlap(RMat(e.vectors.array().square()));
    energies_.resize(n);
    vectors_.resize(n, n);
    for (int k = 0; k < n; ++k) {
      energies_[k] = e.values[label_to_col[k]];
      vectors_.col(k) = e.vectors.col(label_to_col[k]);
    }
  }

  int index(int a, int b) const { return a * levels_b_ + b; }
  int dim() const { return levels_a_ * levels_b_; }

  RMat hamiltonian(double Omega, double omega) const { return static_ - omega * number_ + 0.5 * Omega * drive_; }

  double energy(int a, int b) const { return energies_[index(a, b)]; }
  double static_resonance() const { return energy(2, 0) - energy(0, 1); }
  double chi() const { return energy(1, 1) - energy(1, 0) - energy(0, 1) + energy(0, 0); }

  PairReference bare_pair() const {
    return {CVec(vectors_.col(index(2, 0)).cast<cplx>()), CVec(vectors_.col(index(0, 1)).cast<cplx>())};
  }

  PairGap gap(double Omega, double omega, const PairReference& ref) const {
    const auto e = numerics::symmetric_eigendecomposition(hamiltonian(Omega, omega));
    std::vector<std::pair<double, CVec>> modes;
    for (Eigen::Index j = 0; j < e.values.size(); ++j) modes.emplace_back(e.values[j], e.vectors.col(j).cast<cplx>());
    return pair_gap(modes, ref, 0.0);
  }

 private:
  int levels_a_;
  int levels_b_;
  RMat number_;
  RMat drive_;
  RMat static_;
  RVec energies_;
  RMat vectors_;
};

inline SpectroscopyPoint rwa_spectroscopy(const RwaModel& model, double Omega, const ScanWindow& window,
                                          const SpectroscopyOptions& opt = {}, const PairReference* ref = nullptr) {
  const double omega0 = model.static_resonance();
  if (Omega == 0.0) {
    SpectroscopyPoint p;
    p.omega_fgge = omega0;
    p.modes = model.bare_pair();
    return p;
  }
  const PairReference r = ref ? *ref : model.bare_pair();
  auto gap = [&](double w) { return model.gap(Omega, w, r); };
  auto p = locate_anticrossing(gap, window, opt.tolerance, opt.workers);
  p.amplitude = Omega;
  p.delta_ac = p.omega_fgge - omega0;
  return p;
}

inline SpectroscopyPoint rwa_spectroscopy(const device::DeviceParams& d, double Omega, const ScanWindow& window,
                                          const SpectroscopyOptions& opt = {}) {
  return rwa_spectroscopy(RwaModel(d), Omega, window, opt);
}

inline std::vector<SpectroscopyPoint> rwa_spectroscopy_scan(const RwaModel& model, const std::vector<double>& amplitudes,
                                                            const SpectroscopyOptions& opt = {}) {
  return tracked_scan(amplitudes, model.static_resonance(), opt,
                      [&](double Omega, const ScanWindow& w, const PairReference* ref) {
                        return rwa_spectroscopy(model, Omega, w, opt, ref);
                      });
}

// Tracks through `substeps` intermediate amplitudes per grid interval, so a
// coarse grid keeps each resonance inside the search window.
inline std::vector<SpectroscopyPoint> rwa_spectroscopy_ramped(const RwaModel& model, const std::vector<double>& amplitudes,
                                                              const SpectroscopyOptions& opt = {}, int substeps = 8) {
  if (substeps < 1) throw ConfigError("rwa_spectroscopy_ramped: substeps must be positive");
  std::vector<double> dense;
  std::vector<std::size_t> keep;
  double last = 0.0;
  for (double a : amplitudes) {
    if (!(a > last) && !(a == 0.0 && dense.empty())) throw ConfigError("spectroscopy scan: amplitudes must increase");
    if (a == 0.0) continue;
    for (int k = 1; k <= substeps; ++k) dense.push_back(last + (a - last) * k / substeps);
    keep.push_back(dense.size() - 1);
    last = a;
  }
  const auto all = rwa_spectroscopy_scan(model, dense, opt);
  std::vector<SpectroscopyPoint> out;
  for (std::size_t i : keep) out.push_back(all[i]);
  return out;
}

// Floquet scan with each search window centred on the RWA resonance plus the
// Floquet-RWA offset seen at the previous amplitude. Zero amplitudes are
// skipped.
inline std::vector<SpectroscopyPoint> floquet_spectroscopy_with_prior(const device::StaticSystem& sys, const RwaModel& rwa,
                                                                      const std::vector<double>& amplitudes,
                                                                      const SpectroscopyOptions& opt = {}) {
  const auto prior = rwa_spectroscopy_ramped(rwa, amplitudes, opt);
  std::vector<SpectroscopyPoint> out;
  const PairReference* ref = nullptr;
  double offset = sys.fgge_resonance() - rwa.static_resonance();
  for (const auto& p : prior) {
    out.push_back(fgge_spectroscopy(sys, p.amplitude, {p.omega_fgge + offset, opt.half_width, opt.coarse_points}, opt, ref));
    ref = &out.back().modes;
    offset = out.back().omega_fgge - p.omega_fgge;
  }
  return out;
}

}  // namespace fgge::floquet
