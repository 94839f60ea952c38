#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "fgge/numerics/linalg.hpp"
#include "fgge/numerics/models.hpp"
#include "fgge/numerics/nlls.hpp"
#include "fgge/numerics/ode.hpp"
#include "fgge/numerics/roots.hpp"

using namespace fgge;
using namespace fgge::numerics;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

std::vector<double> sample(const ModelFunction& m, const RVec& p, const std::vector<double>& x) {
  std::vector<double> y;
  for (double xi : x) y.push_back(m.eval(p, xi));
  return y;
}

struct Case {
  ModelFunction model;
  RVec truth;
  RVec guess;
  std::vector<double> x;
};

std::vector<Case> cases() {
  std::vector<Case> out;
  RVec p(4), g(4);
  p << 0.1, 0.8, 0.3, 0.7;
  g << 0.0, 1.0, 0.0, 1.0;
  out.push_back({gaussian_model(), p, g, linspace(-3, 3, 41)});
  RVec s(5), sg(5);
  s << 0.5, 0.45, 0.2, 6.0, 0.3;
  sg << 0.45, 0.4, 0.1, 5.8, 0.2;
  out.push_back({damped_sine_model(), s, sg, linspace(0, 4, 81)});
  RVec e(3), eg(3);
  e << 0.25, 0.7, 0.95;
  eg << 0.3, 0.6, 0.9;
  out.push_back({exp_decay_model(), e, eg, linspace(0, 60, 31)});
  RVec l(3), lg(3);
  l << 0.002, 0.06, 0.1;
  lg << 0.0, 0.05, 0.2;
  out.push_back({leakage_model(), l, lg, linspace(0, 50, 26)});
  RVec li(2), lig(2);
  li << -1.5, 2.5;
  lig << 0.0, 1.0;
  out.push_back({line_model(), li, lig, linspace(-1, 1, 11)});
  return out;
}

}  // namespace

TEST(ModelFunction, AnalyticJacobianMatchesCentralDifferences) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> jitter(0.8, 1.2);
  for (const auto& c : cases()) {
    for (int trial = 0; trial < 20; ++trial) {
      RVec p = c.truth;
      for (Eigen::Index k = 0; k < p.size(); ++k) p[k] *= jitter(rng);
      for (double x : c.x) {
        const RVec ga = c.model.gradient(p, x);
        const RVec gf = c.model.finite_difference_gradient(p, x);
        for (Eigen::Index k = 0; k < p.size(); ++k)
          EXPECT_LE(std::abs(ga[k] - gf[k]), 1e-5 * std::max(1.0, std::abs(ga[k]))) << c.model.name << " param " << k;
      }
    }
  }
}

TEST(Nlls, ExactDataRecoversParameters) {
  for (const auto& c : cases()) {
    const auto y = sample(c.model, c.truth, c.x);
    const auto fit = nlls_fit(c.model, c.x, y, c.guess);
    ASSERT_TRUE(fit.ok()) << c.model.name << ": " << fit.message;
    for (Eigen::Index k = 0; k < c.truth.size(); ++k)
      EXPECT_NEAR(fit.params[k], c.truth[k], 1e-8 * std::max(1.0, std::abs(c.truth[k]))) << c.model.name;
    EXPECT_LE(fit.r_squared, 1.0);
  }
}

TEST(Nlls, GaussianCenterUnderOnePercentNoise) {
  const auto m = gaussian_model();
  RVec p(4);
  p << 0.0, 1.0, 0.2, 0.5;
  const auto x = linspace(-2.5, 2.5, 41);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0.0, 0.01);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    auto y = sample(m, p, x);
    for (auto& v : y) v += noise(rng);
    RVec g(4);
    g << 0.0, 0.9, 0.0, 0.6;
    const auto fit = nlls_fit(m, x, y, g);
    ASSERT_TRUE(fit.ok());
    worst = std::max(worst, std::abs(fit.params[2] - p[2]));
  }
  EXPECT_LT(worst, 0.02 * p[3]);
}

TEST(Nlls, BadInitialGuessIsFlaggedOrCorrect) {
  const auto m = gaussian_model();
  RVec p(4);
  p << 0.0, 1.0, 0.0, 0.3;
  const auto x = linspace(-3, 3, 41);
  const auto y = sample(m, p, x);
  for (double offset : {-3.0, 3.0}) {
    RVec g(4);
    g << 0.0, 1.0, offset * 0.3 * 3.0, 0.3;
    const auto fit = nlls_fit(m, x, y, g);
    if (fit.ok()) {
      EXPECT_NEAR(fit.params[2], 0.0, 1e-6);
      EXPECT_NEAR(std::abs(fit.params[3]), 0.3, 1e-6);
    } else {
      SUCCEED() << "flagged: " << fit.message;
    }
  }
}

TEST(Nlls, InvariantUnderDataReordering) {
  const auto m = damped_sine_model();
  RVec p(5);
  p << 0.5, 0.4, 0.3, 5.0, 0.1;
  auto x = linspace(0, 5, 60);
  auto y = sample(m, p, x);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.01);
  for (auto& v : y) v += noise(rng);
  RVec g(5);
  g << 0.5, 0.35, 0.2, 4.9, 0.0;
  const auto a = nlls_fit(m, x, y, g);
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<double> xs, ys;
  for (auto i : order) {
    xs.push_back(x[i]);
    ys.push_back(y[i]);
  }
  const auto b = nlls_fit(m, xs, ys, g);
  ASSERT_TRUE(a.ok() && b.ok());
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(a.params[k], b.params[k], 1e-9);
}

TEST(Nlls, CovarianceSymmetricPsd) {
  const auto m = exp_decay_model();
  RVec p(3);
  p << 0.25, 0.7, 0.93;
  const auto x = linspace(1, 50, 12);
  auto y = sample(m, p, x);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.005);
  for (auto& v : y) v += noise(rng);
  RVec g(3);
  g << 0.2, 0.8, 0.9;
  const auto fit = nlls_fit(m, x, y, g);
  ASSERT_TRUE(fit.ok());
  EXPECT_LT((fit.covariance - fit.covariance.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  Eigen::SelfAdjointEigenSolver<RMat> es(fit.covariance);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-18);
}

TEST(HermitianEigen, DiagonalInputIsSortedWithIdentityVectors) {
  CMat h = CMat::Zero(4, 4);
  h(0, 0) = 3.0;
  h(1, 1) = -1.0;
  h(2, 2) = 2.0;
  h(3, 3) = 0.5;
  const auto e = hermitian_eigendecomposition(h);
  EXPECT_TRUE(std::is_sorted(e.values.data(), e.values.data() + 4));
  EXPECT_DOUBLE_EQ(e.values[0], -1.0);
  EXPECT_NEAR(std::abs(e.vectors(1, 0)), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(e.vectors(0, 3)), 1.0, 1e-14);
}

TEST(HermitianEigen, TwoByTwoOffDiagonal) {
  const double g = 0.37;
  CMat h(2, 2);
  h << 0.0, g, g, 0.0;
  const auto e = hermitian_eigendecomposition(h);
  EXPECT_NEAR(e.values[0], -g, 1e-15);
  EXPECT_NEAR(e.values[1], g, 1e-15);
  EXPECT_NEAR(std::abs(e.vectors(0, 1)), 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(std::abs(e.vectors(0, 1) - e.vectors(1, 1)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(e.vectors(0, 0) + e.vectors(1, 0)), 0.0, 1e-14);
}

TEST(HermitianEigen, RandomReconstructionAndResiduals) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> n(0.0, 1.0);
  CMat a(50, 50);
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 50; ++j) a(i, j) = cplx(n(rng), n(rng));
  const CMat h = 0.5 * (a + a.adjoint());
  const auto e = hermitian_eigendecomposition(h);
  const double hn = max_abs(h);
  EXPECT_LT(max_abs(e.vectors * e.values.asDiagonal() * e.vectors.adjoint() - h), 1e-9 * hn);
  EXPECT_LT(unitarity_error(e.vectors), 1e-9);
  for (int k = 0; k < 50; ++k)
    EXPECT_LT((h * e.vectors.col(k) - e.values[k] * e.vectors.col(k)).norm(), 1e-9 * h.norm());
}

TEST(HermitianEigen, WeylBound) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  auto random_h = [&](int d) {
    CMat a(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) = cplx(n(rng), n(rng));
    return CMat(0.5 * (a + a.adjoint()));
  };
  const CMat h = random_h(20), e = random_h(20);
  const double eps = 1e-3;
  const auto e0 = hermitian_eigendecomposition(h), e1 = hermitian_eigendecomposition(CMat(h + eps * e));
  const double enorm = hermitian_eigendecomposition(e).values.cwiseAbs().maxCoeff();
  EXPECT_LE((e1.values - e0.values).cwiseAbs().maxCoeff(), eps * enorm * (1 + 1e-9));
}

TEST(HermitianEigen, RejectsNonHermitian) {
  CMat h(2, 2);
  h << 0.0, 1.0, 0.5, 0.0;
  EXPECT_THROW(hermitian_eigendecomposition(h), std::invalid_argument);
}

TEST(Ode, ConstantGeneratorMatchesMatrixExponential) {
  CMat h(2, 2);
  h << 0.3, 1.0, 1.0, -0.2;
  auto rhs = [&](double, const CVec& y) { return CVec(cplx(0, -1) * (h * y)); };
  CVec y0(2);
  y0 << 1.0, 0.0;
  const CVec y = ode_step_evolve(rhs, y0, 0.0, 5.0, 0.01);
  const CVec exact = expm_hermitian(h, 5.0) * y0;
  EXPECT_LT((y - exact).norm(), 1e-8);
}

TEST(Ode, ZeroGeneratorIsIdentity) {
  auto rhs = [](double, const CVec& y) { return CVec(CVec::Zero(y.size())); };
  CVec y0(3);
  y0 << 1.0, cplx(0.2, 0.1), -0.4;
  EXPECT_EQ(ode_step_evolve(rhs, y0, 0.0, 1.0, 0.1), y0);
}

TEST(Ode, FourthOrderOnDrivenTwoLevel) {
  auto rhs = [](double t, const CVec& y) {
    CMat h(2, 2);
    const double f = 2.0 * std::cos(3.0 * t);
    h << 0.5, f, f, -0.5;
    return CVec(cplx(0, -1) * (h * y));
  };
  CVec y0(2);
  y0 << 1.0, 0.0;
  const CVec ref = ode_step_evolve(rhs, y0, 0.0, 4.0, 1e-4);
  const double e1 = (ode_step_evolve(rhs, y0, 0.0, 4.0, 0.04) - ref).norm();
  const double e2 = (ode_step_evolve(rhs, y0, 0.0, 4.0, 0.02) - ref).norm();
  const double order = std::log2(e1 / e2);
  EXPECT_NEAR(order, 4.0, 0.3);
}

TEST(Ode, NonFiniteStateIsRejected) {
  auto rhs = [](double, const RVec& y) { return RVec(y * std::numeric_limits<double>::infinity()); };
  RVec y0 = RVec::Ones(2);
  EXPECT_THROW(ode_step_evolve(rhs, y0, 0.0, 1.0, 0.1), fgge::NumericalError);
}

TEST(Roots, LinearRoot) {
  const auto r = root_find_scalar([](double x) { return x - 1.0; }, 0.0, 2.0);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x, 1.0, 1e-12);
  EXPECT_LE(r.iterations, 100);
}

TEST(Roots, NoSignChangeThrows) {
  EXPECT_THROW(root_find_scalar([](double x) { return x * x + 1.0; }, -1.0, 1.0), std::domain_error);
}

TEST(Roots, GoldenSectionQuadratic) {
  const auto r = golden_section_min([](double x) { return (x - 0.3) * (x - 0.3) + 2.0; }, -1.0, 2.0, 1e-8);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x, 0.3, 1e-7);
  EXPECT_FALSE(r.low_confidence);
}

TEST(Roots, FlatFunctionIsLowConfidence) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto r = golden_section_min([&](double) { return 1.0 + 1e-15 * u(rng); }, 0.0, 1.0, 1e-6);
  EXPECT_TRUE(r.low_confidence);
}
