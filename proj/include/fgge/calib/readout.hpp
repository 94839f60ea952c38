#pragma once

#include <array>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "fgge/core/errors.hpp"
#include "fgge/numerics/linalg.hpp"
#include "fgge/pulse/model.hpp"

namespace fgge::calib {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

// g, e, f populations of each transmon; levels above f are read as f.
struct QutritPopulations {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  const Vec3& of(pulse::Transmon q) const { return q == pulse::Transmon::A ? a : b; }
};

inline QutritPopulations qutrit_populations(const pulse::RotatingFrameModel& m, const CMat& rho) {
  QutritPopulations p;
  for (int i = 0; i < m.dim(); ++i) {
    const double w = rho(i, i).real();
    p.a[std::min(2, m.level(pulse::Transmon::A, i))] += w;
    p.b[std::min(2, m.level(pulse::Transmon::B, i))] += w;
  }
  return p;
}

// Simulated readout: exact populations by default, optionally through a
// confusion matrix (measured = C * true), finite-shot sampling and
// confusion-matrix inversion.
struct Readout {
  int shots = 0;  // 0 = exact
  std::uint64_t seed = 1;
  Mat3 confusion_a = Mat3::Identity();
  Mat3 confusion_b = Mat3::Identity();
  bool mitigate = true;

  void validate() const {
    if (shots < 0) throw ConfigError("Readout: shots must be non-negative");
    for (const Mat3* c : {&confusion_a, &confusion_b}) {
      if ((c->array() < 0.0).any()) throw ConfigError("Readout: confusion matrix has negative entries");
      if (((c->colwise().sum().array() - 1.0).abs() > 1e-9).any())
        throw ConfigError("Readout: confusion matrix columns must sum to 1");
    }
  }
};

class ReadoutSampler {
 public:
  explicit ReadoutSampler(const Readout& r) : r_(r), rng_(r.seed) { r.validate(); }

  QutritPopulations measure(const QutritPopulations& exact) {
    return {measure_one(exact.a, r_.confusion_a), measure_one(exact.b, r_.confusion_b)};
  }

 private:
  Vec3 measure_one(const Vec3& p, const Mat3& c) {
    Vec3 q = c * p.cwiseMax(0.0);
    if (r_.shots > 0) {
      Vec3 counts = Vec3::Zero();
      int left = r_.shots;
      double rest = 1.0;
      for (int k = 0; k < 2 && left > 0; ++k) {
        const double pk = rest > 0.0 ? std::clamp(q[k] / rest, 0.0, 1.0) : 0.0;
        std::binomial_distribution<int> draw(left, pk);
        counts[k] = draw(rng_);
        left -= static_cast<int>(counts[k]);
        rest -= q[k];
      }
      counts[2] = left;
      q = counts / r_.shots;
    }
    if (r_.mitigate && !c.isIdentity(0.0)) q = c.fullPivLu().solve(q);
    return q;
  }

  Readout r_;
  std::mt19937_64 rng_;
};

}  // namespace fgge::calib
