#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fgge/core/errors.hpp"
#include "fgge/device/params.hpp"
#include "fgge/device/transmon.hpp"
#include "fgge/numerics/linalg.hpp"

namespace fgge::device {

struct LevelLabel {
  int a = 0;
  int b = 0;
  bool operator==(const LevelLabel&) const = default;
};

// Greedy bijection between eigenvectors (columns of `vecs`) and product
// labels by descending squared overlap. Returns, for every label index, the
// column assigned to it.
inline std::vector<int> assign_by_overlap(const RMat& weights) {
  const int n = static_cast<int>(weights.rows());
  std::vector<int> label_to_col(n, -1), col_to_label(n, -1);
  std::vector<std::pair<double, std::pair<int, int>>> entries;
  entries.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) entries.push_back({weights(i, j), {i, j}});
  std::stable_sort(entries.begin(), entries.end(), [](auto& x, auto& y) { return x.first > y.first; });
  for (auto& [w, ij] : entries) {
    auto [i, j] = ij;
    if (label_to_col[i] < 0 && col_to_label[j] < 0) {
      label_to_col[i] = j;
      col_to_label[j] = i;
    }
  }
  return label_to_col;
}

// Two transmons truncated to their lowest levels, coupled through
// J_tilde n_A n_B. The working basis is the product of isolated-transmon
// eigenstates; dressed eigenstates of the coupled system are labelled by the
// product state they overlap most.
class StaticSystem {
 public:
  StaticSystem(const DeviceParams& device, int levels_a = 6, int levels_b = 4, std::size_t max_dim = 4096)
      : device_(device), levels_a_(levels_a), levels_b_(levels_b) {
    if (levels_a < 2 || levels_b < 2) throw ConfigError("StaticSystem: need at least two levels per transmon");
    if (static_cast<std::size_t>(levels_a) * static_cast<std::size_t>(levels_b) > max_dim)
      throw ConfigError("StaticSystem: dimension exceeds configured maximum");
    spec_a_ = device.qubit_a.spectrum(levels_a);
    spec_b_ = device.qubit_b.spectrum(levels_b);
    const int d = dim();
    h0_ = RMat::Zero(d, d);
    for (int a = 0; a < levels_a; ++a)
      for (int b = 0; b < levels_b; ++b) h0_(index(a, b), index(a, b)) = spec_a_.energies[a] + spec_b_.energies[b];
    const RMat ia = RMat::Identity(levels_a, levels_a), ib = RMat::Identity(levels_b, levels_b);
    h0_ += device.J_tilde * kron(spec_a_.n_matrix, spec_b_.n_matrix);
    drive_a_ = kron(spec_a_.n_matrix / spec_a_.n01(), ib);
    drive_b_ = kron(ia, spec_b_.n_matrix / spec_b_.n01());

    const auto eig = numerics::symmetric_eigendecomposition(h0_);
    const RMat w = eig.vectors.array().square().matrix();
    const auto label_to_col = assign_by_overlap(w);
    energies_.resize(d);
    vectors_.resize(d, d);
    for (int k = 0; k < d; ++k) {
      const int c = label_to_col[k];
      energies_[k] = eig.values[c];
      RVec v = eig.vectors.col(c);
      if (v[k] < 0.0) v = -v;
      vectors_.col(k) = v;
      min_label_overlap_ = std::min(min_label_overlap_, w(k, c));
    }
  }

  const DeviceParams& device() const { return device_; }
  int levels_a() const { return levels_a_; }
  int levels_b() const { return levels_b_; }
  int dim() const { return levels_a_ * levels_b_; }
  int index(int a, int b) const { return a * levels_b_ + b; }
  LevelLabel label(int k) const { return {k / levels_b_, k % levels_b_}; }

  const TransmonSpectrum& spectrum_a() const { return spec_a_; }
  const TransmonSpectrum& spectrum_b() const { return spec_b_; }
  // Static Hamiltonian in the product eigenbasis, rad/s.
  const RMat& h0() const { return h0_; }
  // n_A / n01_A and n_B / n01_B, so that <g|D|e> = 1.
  const RMat& drive_operator_a() const { return drive_a_; }
  const RMat& drive_operator_b() const { return drive_b_; }
  const RMat& drive_operator() const { return device_.drive_target == DriveTarget::A ? drive_a_ : drive_b_; }

  // Dressed eigen-energies and vectors indexed by product label.
  const RVec& dressed_energies() const { return energies_; }
  const RMat& dressed_vectors() const { return vectors_; }
  double energy(int a, int b) const { return energies_[index(a, b)]; }
  double min_label_overlap() const { return min_label_overlap_; }

  double fgge_resonance() const { return energy(2, 0) - energy(0, 1); }
  double chi() const { return energy(1, 1) - energy(1, 0) - energy(0, 1) + energy(0, 0); }
  double qubit_frequency_a() const { return energy(1, 0) - energy(0, 0); }
  double qubit_frequency_b() const { return energy(0, 1) - energy(0, 0); }

  static RMat kron(const RMat& x, const RMat& y) {
    RMat out(x.rows() * y.rows(), x.cols() * y.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = 0; j < x.cols(); ++j) out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    return out;
  }

 private:
  DeviceParams device_;
  int levels_a_;
  int levels_b_;
  TransmonSpectrum spec_a_;
  TransmonSpectrum spec_b_;
  RMat h0_;
  RMat drive_a_;
  RMat drive_b_;
  RVec energies_;
  RMat vectors_;
  double min_label_overlap_ = 1.0;
};

}  // namespace fgge::device
