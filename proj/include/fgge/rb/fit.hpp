#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "fgge/core/errors.hpp"
#include "fgge/numerics/models.hpp"
#include "fgge/numerics/nlls.hpp"

namespace fgge::rb {

struct DecayFit {
  double A = 0.0, B = 0.0, p = 0.0;
  double A_error = 0.0, B_error = 0.0, p_error = 0.0;
  numerics::FitResult fit;
  bool flagged = false;
  std::string message;
};

// A + B p^s. The starting point comes from a scan over p with A and B solved
// linearly.
inline DecayFit fit_rb_decay(const std::vector<double>& s, const std::vector<double>& y) {
  if (s.size() != y.size()) throw ConfigError("fit_rb_decay: lengths and survivals differ in size");
  if (s.size() < 4) throw ConfigError("fit_rb_decay: need at least four lengths");
  DecayFit r;
  double best = INFINITY, p0 = 0.9;
  RVec ab(2);
  for (int k = 1; k < 400; ++k) {
    const double p = 1.0 - std::pow(10.0, -4.0 + 4.0 * k / 400.0);
    RMat a(s.size(), 2);
    RVec b(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      a(i, 0) = 1.0;
      a(i, 1) = std::pow(p, s[i]);
      b[i] = y[i];
    }
    const RVec c = a.colPivHouseholderQr().solve(b);
    const double cost = (a * c - b).squaredNorm();
    if (cost < best) {
      best = cost;
      p0 = p;
      ab = c;
    }
  }
  RVec init(3);
  init << ab[0], ab[1], p0;
  numerics::NllsOptions opt;
  opt.min_r_squared = 0.0;
  r.fit = numerics::nlls_fit(numerics::exp_decay_model(), s, y, init, opt);
  r.A = r.fit.params[0];
  r.B = r.fit.params[1];
  r.p = r.fit.params[2];
  r.A_error = r.fit.std_error(0);
  r.B_error = r.fit.std_error(1);
  r.p_error = r.fit.std_error(2);
  if (!r.fit.converged || !r.fit.identifiable) {
    r.flagged = true;
    r.message = "fit did not converge or p is unidentifiable";
  }
  double spread = 0.0;
  for (double v : y) spread = std::max(spread, std::abs(v - y.front()));
  if (spread < 1e-12 || std::abs(r.B) < 1e-9) {
    r.flagged = true;
    r.message = "no decay in data: p unidentifiable";
  }
  if (!(r.p > 0.0 && r.p <= 1.0)) {
    r.flagged = true;
    r.message = "p outside (0, 1]";
  }
  return r;
}

struct LeakageFit {
  double p0 = 0.0, p_inf = 0.0, gamma = 0.0;
  double p0_error = 0.0, p_inf_error = 0.0, gamma_error = 0.0;
  double gamma_up = 0.0, gamma_down = 0.0;
  double gamma_up_error = 0.0, gamma_down_error = 0.0;
  numerics::FitResult fit;
  bool flagged = false;
  std::string message;
};

// p_inf (1 - e^{-Gamma s}) + p0 e^{-Gamma s}; gamma_up = p_inf Gamma and
// gamma_down = Gamma - gamma_up per sequence step.
inline LeakageFit fit_leakage(const std::vector<double>& s, const std::vector<double>& y) {
  if (s.size() != y.size()) throw ConfigError("fit_leakage: lengths and populations differ in size");
  if (s.size() < 4) throw ConfigError("fit_leakage: need at least four lengths");
  LeakageFit r;
  double best = INFINITY, g0 = 0.1;
  RVec lin(2);
  for (int k = 0; k <= 400; ++k) {
    const double g = std::pow(10.0, -4.0 + 5.0 * k / 400.0);
    RMat a(s.size(), 2);
    RVec b(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double e = std::exp(-g * s[i]);
      a(i, 0) = e;
      a(i, 1) = 1.0 - e;
      b[i] = y[i];
    }
    const RVec c = a.colPivHouseholderQr().solve(b);
    const double cost = (a * c - b).squaredNorm();
    if (cost < best) {
      best = cost;
      g0 = g;
      lin = c;
    }
  }
  RVec init(3);
  init << lin[0], lin[1], g0;
  numerics::NllsOptions opt;
  opt.min_r_squared = 0.0;
  r.fit = numerics::nlls_fit(numerics::leakage_model(), s, y, init, opt);
  r.p0 = r.fit.params[0];
  r.p_inf = r.fit.params[1];
  r.gamma = r.fit.params[2];
  r.p0_error = r.fit.std_error(0);
  r.p_inf_error = r.fit.std_error(1);
  r.gamma_error = r.fit.std_error(2);
  r.gamma_up = r.p_inf * r.gamma;
  r.gamma_down = r.gamma - r.gamma_up;
  const auto& C = r.fit.covariance;
  if (C.rows() == 3) {
    // d(gamma_up) = (0, Gamma, p_inf), d(gamma_down) = (0, -Gamma, 1 - p_inf)
    RVec ju(3), jd(3);
    ju << 0.0, r.gamma, r.p_inf;
    jd << 0.0, -r.gamma, 1.0 - r.p_inf;
    r.gamma_up_error = std::sqrt(std::max(0.0, ju.dot(C * ju)));
    r.gamma_down_error = std::sqrt(std::max(0.0, jd.dot(C * jd)));
  }
  if (!r.fit.converged || !r.fit.identifiable) {
    r.flagged = true;
    r.message = "fit did not converge or Gamma is unidentifiable";
  }
  double spread = 0.0;
  for (double v : y) spread = std::max(spread, std::abs(v - y.front()));
  if (spread < 1e-12) {
    r.flagged = true;
    r.message = "constant data: Gamma unidentifiable";
  }
  if (!(r.gamma > 0.0)) {
    r.flagged = true;
    r.message = "Gamma <= 0";
  }
  return r;
}

// Average fidelity of one Clifford from the reference decay.
inline double clifford_fidelity(double p, int d = 4) { return 1.0 - (1.0 - p) * (d - 1) / d; }

struct InterleavedFidelity {
  double fidelity = 0.0;
  double error = 0.0;
  bool consistent = true;  // 0 < p_irb <= p_ref <= 1
};

inline InterleavedFidelity gate_fidelity_from_p(double p_irb, double p_ref, int d = 4, double p_irb_error = 0.0,
                                                double p_ref_error = 0.0) {
  if (p_ref == 0.0) throw ConfigError("gate_fidelity_from_p: p_ref is zero");
  if (d < 2) throw ConfigError("gate_fidelity_from_p: dimension must be at least 2");
  InterleavedFidelity f;
  const double w = static_cast<double>(d - 1) / d;
  f.fidelity = 1.0 - w * (1.0 - p_irb / p_ref);
  f.error = w * std::hypot(p_irb_error / p_ref, p_irb * p_ref_error / (p_ref * p_ref));
  f.consistent = p_irb > 0.0 && p_irb <= p_ref && p_ref <= 1.0;
  return f;
}

struct LeakagePerGate {
  double value = 0.0;
  double error = 0.0;
};

// Not clipped at zero.
inline LeakagePerGate leakage_per_gate(const LeakageFit& rb, const LeakageFit& irb) {
  return {irb.gamma_up - rb.gamma_up, std::hypot(irb.gamma_up_error, rb.gamma_up_error)};
}

inline nlohmann::json to_json(const DecayFit& f) {
  return {{"A", f.A}, {"B", f.B}, {"p", f.p}, {"A_error", f.A_error}, {"B_error", f.B_error},
          {"p_error", f.p_error}, {"r_squared", f.fit.r_squared}, {"flagged", f.flagged}, {"message", f.message}};
}

inline nlohmann::json to_json(const LeakageFit& f) {
  return {{"p0", f.p0},
          {"p_inf", f.p_inf},
          {"Gamma", f.gamma},
          {"p0_error", f.p0_error},
          {"p_inf_error", f.p_inf_error},
          {"Gamma_error", f.gamma_error},
          {"gamma_up", f.gamma_up},
          {"gamma_up_error", f.gamma_up_error},
          {"gamma_down", f.gamma_down},
          {"gamma_down_error", f.gamma_down_error},
          {"flagged", f.flagged},
          {"message", f.message}};
}

}  // namespace fgge::rb
