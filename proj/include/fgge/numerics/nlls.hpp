#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

#include "fgge/numerics/linalg.hpp"
#include "fgge/numerics/models.hpp"

namespace fgge::numerics {

struct NllsOptions {
  int max_iterations = 200;
  double gradient_tol = 1e-10;
  double step_tol = 1e-13;
  double min_r_squared = 0.9;
  double max_condition = 1e12;
};

struct FitResult {
  RVec params;
  RMat covariance;
  double residual_norm = 0.0;
  double r_squared = 0.0;
  bool converged = false;
  bool identifiable = true;
  int iterations = 0;
  std::string message;

  // Usable result: converged, well-conditioned and above the R^2 gate.
  bool ok(double min_r_squared = 0.9) const {
    return converged && identifiable && r_squared >= min_r_squared;
  }
  double std_error(int k) const { return std::sqrt(std::max(0.0, covariance(k, k))); }
};

namespace detail {

inline double cost_of(const ModelFunction& m, const RVec& p, std::span<const double> x,
                      std::span<const double> y, RVec& r) {
  r.resize(static_cast<Eigen::Index>(x.size()));
  double c = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    r[static_cast<Eigen::Index>(i)] = y[i] - m.eval(p, x[i]);
    c += r[static_cast<Eigen::Index>(i)] * r[static_cast<Eigen::Index>(i)];
  }
  return std::isfinite(c) ? c : std::numeric_limits<double>::infinity();
}

inline RMat jacobian_of(const ModelFunction& m, const RVec& p, std::span<const double> x) {
  RMat j(static_cast<Eigen::Index>(x.size()), p.size());
  for (std::size_t i = 0; i < x.size(); ++i) j.row(static_cast<Eigen::Index>(i)) = m.gradient_at(p, x[i]).transpose();
  return j;
}

}  // namespace detail

// Levenberg-Marquardt (damped Gauss-Newton with diagonal scaling).
inline FitResult nlls_fit(const ModelFunction& model, std::span<const double> x, std::span<const double> y,
                          RVec initial, const NllsOptions& opt = {}) {
  if (x.size() != y.size()) throw std::invalid_argument("nlls_fit: x and y differ in length");
  const int m = model.size();
  if (initial.size() != m) throw std::invalid_argument("nlls_fit: initial guess has wrong size");
  if (static_cast<int>(x.size()) < m) throw std::invalid_argument("nlls_fit: fewer data than parameters");

  FitResult fit;
  RVec p = model.clamp(std::move(initial));
  RVec r;
  double cost = detail::cost_of(model, p, x, y, r);
  if (!std::isfinite(cost)) {
    fit.params = p;
    fit.message = "non-finite model at initial guess";
    return fit;
  }
  double lambda = 1e-3;
  RMat jac;
  for (int it = 0; it < opt.max_iterations; ++it) {
    fit.iterations = it + 1;
    jac = detail::jacobian_of(model, p, x);
    const RVec g = jac.transpose() * r;
    const RMat a = jac.transpose() * jac;
    const double rnorm = r.norm();
    double cosine = 0.0;
    for (int k = 0; k < m; ++k) {
      const double cn = jac.col(k).norm();
      if (cn > 0.0 && rnorm > 0.0) cosine = std::max(cosine, std::abs(g[k]) / (cn * rnorm));
    }
    if (rnorm == 0.0 || cosine < opt.gradient_tol) {
      fit.converged = true;
      fit.message = "gradient tolerance reached";
      break;
    }
    bool accepted = false;
    RVec step;
    while (lambda < 1e16) {
      RMat damped = a;
      for (int k = 0; k < m; ++k) damped(k, k) += lambda * std::max(a(k, k), 1e-300);
      step = damped.ldlt().solve(g);
      const RVec trial = model.clamp(p + step);
      RVec rt;
      const double ct = detail::cost_of(model, trial, x, y, rt);
      if (ct < cost) {
        step = trial - p;
        p = trial;
        r = rt;
        cost = ct;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 4.0;
    }
    if (!accepted) {
      fit.converged = cosine < 1e-6;
      fit.message = fit.converged ? "no further decrease at machine precision" : "damping exhausted";
      break;
    }
    if (step.norm() <= opt.step_tol * (p.norm() + opt.step_tol)) {
      fit.converged = true;
      fit.message = "step tolerance reached";
      break;
    }
  }
  if (!fit.converged && fit.message.empty()) fit.message = "iteration limit reached";

  fit.params = p;
  fit.residual_norm = std::sqrt(cost);
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double sst = 0.0;
  for (double v : y) sst += (v - mean) * (v - mean);
  fit.r_squared = sst > 0.0 ? 1.0 - cost / sst : (cost <= 1e-24 ? 1.0 : 0.0);

  jac = detail::jacobian_of(model, p, x);
  RVec colnorm(m);
  for (int k = 0; k < m; ++k) colnorm[k] = jac.col(k).norm();
  fit.identifiable = colnorm.minCoeff() > 0.0;
  RMat scaled = jac;
  for (int k = 0; k < m; ++k)
    if (colnorm[k] > 0.0) scaled.col(k) /= colnorm[k];
  Eigen::SelfAdjointEigenSolver<RMat> es(scaled.transpose() * scaled);
  const RVec ev = es.eigenvalues();
  if (fit.identifiable && ev.minCoeff() * opt.max_condition < ev.maxCoeff()) fit.identifiable = false;
  RMat inv = RMat::Zero(m, m);
  for (int k = 0; k < m; ++k)
    if (ev[k] > ev.maxCoeff() * 1e-14) inv += es.eigenvectors().col(k) * es.eigenvectors().col(k).transpose() / ev[k];
  const int dof = static_cast<int>(x.size()) - m;
  const double s2 = dof > 0 ? cost / dof : 0.0;
  fit.covariance = RMat(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const double ci = colnorm[i] > 0 ? colnorm[i] : 1.0, cj = colnorm[j] > 0 ? colnorm[j] : 1.0;
      fit.covariance(i, j) = s2 * inv(i, j) / (ci * cj);
    }
  if (!fit.identifiable) fit.message += "; parameters not identifiable";
  return fit;
}

}  // namespace fgge::numerics
