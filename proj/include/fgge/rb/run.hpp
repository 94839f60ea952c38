#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <vector>

#include <json.hpp>

#include "fgge/core/parallel.hpp"
#include "fgge/rb/channels.hpp"
#include "fgge/rb/fit.hpp"
#include "fgge/rb/sequence.hpp"

namespace fgge::rb {

struct RBOptions {
  std::vector<int> lengths{1, 3, 5, 8, 12, 17, 25, 35, 50};
  int seeds = 36;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  int shots = 0;  // per sequence; 0 = exact populations
  // Extra channel after every Clifford (gate-independent noise studies).
  std::optional<pulse::QuantumChannel> clifford_noise;

  void validate() const {
    if (lengths.empty()) throw ConfigError("RB: empty length list");
    for (std::size_t i = 0; i < lengths.size(); ++i) {
      if (lengths[i] < 0) throw ConfigError("RB: negative sequence length");
      if (i > 0 && lengths[i] <= lengths[i - 1]) throw ConfigError("RB: lengths must increase");
    }
    if (seeds < 1) throw ConfigError("RB: need at least one seed");
    if (shots < 0) throw ConfigError("RB: shots must be non-negative");
  }
};

struct SequenceOutcome {
  double p_gg = 0.0;
  double p_f_a = 0.0;
  double p_f_b = 0.0;
};

struct RBCurve {
  bool interleaved = false;
  std::vector<int> lengths;
  std::vector<double> p_gg, p_gg_sem;
  std::vector<double> p_f_a, p_f_a_sem;
  std::vector<double> p_f_b, p_f_b_sem;
  std::vector<std::vector<SequenceOutcome>> raw;  // [length][seed]
};

struct RBResult {
  RBCurve reference;
  RBCurve interleaved;
  DecayFit reference_fit;
  DecayFit interleaved_fit;
  LeakageFit leakage_ref_a, leakage_ref_b, leakage_irb_a, leakage_irb_b;
  double reference_fidelity = 0.0;  // per Clifford
  InterleavedFidelity cz;
  LeakagePerGate leakage_a, leakage_b;
  int shots = 0;
};

// Runs the compiled sequence from |g,g> and returns the final populations of
// the product basis.
inline RVec sequence_populations(const CliffordGroup& group, NativeChannels& channels, const RBSequence& s,
                                 const std::optional<pulse::QuantumChannel>& noise = std::nullopt) {
  const int n = channels.dim();
  CVec v = CVec::Zero(n * n);
  v[0] = 1.0;
  auto apply_element = [&](int e) {
    for (const auto& op : compile_element(group, e)) v = channels.get(op).S * v;
    if (noise) v = noise->S * v;
  };
  const PhysicalOp cz{PhysicalOp::Kind::CZ};
  for (int e : s.elements) {
    apply_element(e);
    if (s.interleaved) v = channels.get(cz).S * v;
  }
  apply_element(s.recovery);
  RVec p(n);
  for (int i = 0; i < n; ++i) p[i] = v[i + n * i].real();
  return p;
}

// P_gg and each transmon's population at f and above.
inline SequenceOutcome outcome_of(const RVec& p, int levels_b) {
  SequenceOutcome o;
  o.p_gg = p[0];
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (i / levels_b >= 2) o.p_f_a += p[i];
    if (i % levels_b >= 2) o.p_f_b += p[i];
  }
  return o;
}

// Multinomial draw of `shots` single-shot outcomes from the populations.
inline RVec sample_populations(const RVec& p, int shots, std::uint64_t seed) {
  std::vector<double> w(static_cast<std::size_t>(p.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i) w[static_cast<std::size_t>(i)] = std::max(0.0, p[i]);
  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> pick(w.begin(), w.end());
  RVec counts = RVec::Zero(p.size());
  for (int k = 0; k < shots; ++k) counts[pick(rng)] += 1.0;
  return counts / static_cast<double>(shots);
}

inline SequenceOutcome simulate_sequence(const CliffordGroup& group, NativeChannels& channels, const RBSequence& s,
                                         const std::optional<pulse::QuantumChannel>& noise = std::nullopt) {
  return outcome_of(sequence_populations(group, channels, s, noise), channels.levels_b());
}

namespace detail {
inline void mean_sem(const std::vector<double>& x, double& mean, double& sem) {
  mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  sem = x.size() > 1 ? std::sqrt(var / static_cast<double>(x.size() - 1) / static_cast<double>(x.size())) : 0.0;
}
}  // namespace detail

inline RBCurve run_rb_curve(const CliffordGroup& group, NativeChannels& channels, const RBOptions& opt, bool interleaved) {
  opt.validate();
  const std::size_t L = opt.lengths.size(), K = static_cast<std::size_t>(opt.seeds);
  const auto outcomes = parallel_map(L * K, opt.workers, [&](std::size_t job) {
    const std::size_t l = job / K, k = job % K;
    const std::uint64_t seed = sequence_seed(opt.seed, l, k);
    const auto seq = sample_sequence(group, {opt.lengths[l], seed, interleaved});
    RVec p = sequence_populations(group, channels, seq, opt.clifford_noise);
    if (opt.shots > 0) p = sample_populations(p, opt.shots, splitmix64(seed ^ (interleaved ? 0x1bULL : 0x0bULL)));
    return outcome_of(p, channels.levels_b());
  });
  RBCurve c;
  c.interleaved = interleaved;
  c.lengths = opt.lengths;
  c.raw.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    std::vector<double> g, fa, fb;
    for (std::size_t k = 0; k < K; ++k) {
      const auto& o = outcomes[l * K + k];
      c.raw[l].push_back(o);
      g.push_back(o.p_gg);
      fa.push_back(o.p_f_a);
      fb.push_back(o.p_f_b);
    }
    double m, s;
    detail::mean_sem(g, m, s);
    c.p_gg.push_back(m);
    c.p_gg_sem.push_back(s);
    detail::mean_sem(fa, m, s);
    c.p_f_a.push_back(m);
    c.p_f_a_sem.push_back(s);
    detail::mean_sem(fb, m, s);
    c.p_f_b.push_back(m);
    c.p_f_b_sem.push_back(s);
  }
  return c;
}

// Reference and interleaved curves, decay and leakage fits, and the derived
// fidelities and leakage per CZ.
inline RBResult run_rb(const CliffordGroup& group, NativeChannels& channels, const RBOptions& opt = {}) {
  RBResult r;
  r.shots = opt.shots;
  r.reference = run_rb_curve(group, channels, opt, false);
  r.interleaved = run_rb_curve(group, channels, opt, true);
  const std::vector<double> s(opt.lengths.begin(), opt.lengths.end());
  r.reference_fit = fit_rb_decay(s, r.reference.p_gg);
  r.interleaved_fit = fit_rb_decay(s, r.interleaved.p_gg);
  r.reference_fidelity = clifford_fidelity(r.reference_fit.p);
  r.cz = gate_fidelity_from_p(r.interleaved_fit.p, r.reference_fit.p, 4, r.interleaved_fit.p_error, r.reference_fit.p_error);
  if (channels.levels_a() > 2) {
    r.leakage_ref_a = fit_leakage(s, r.reference.p_f_a);
    r.leakage_irb_a = fit_leakage(s, r.interleaved.p_f_a);
    r.leakage_a = leakage_per_gate(r.leakage_ref_a, r.leakage_irb_a);
  }
  if (channels.levels_b() > 2) {
    r.leakage_ref_b = fit_leakage(s, r.reference.p_f_b);
    r.leakage_irb_b = fit_leakage(s, r.interleaved.p_f_b);
    r.leakage_b = leakage_per_gate(r.leakage_ref_b, r.leakage_irb_b);
  }
  return r;
}

inline nlohmann::json to_json(const RBResult& r) {
  return {{"reference_fit", to_json(r.reference_fit)},
          {"interleaved_fit", to_json(r.interleaved_fit)},
          {"reference_clifford_fidelity", r.reference_fidelity},
          {"cz_fidelity", r.cz.fidelity},
          {"cz_fidelity_error", r.cz.error},
          {"cz_fidelity_consistent", r.cz.consistent},
          {"leakage",
           {{"reference_a", to_json(r.leakage_ref_a)},
            {"reference_b", to_json(r.leakage_ref_b)},
            {"interleaved_a", to_json(r.leakage_irb_a)},
            {"interleaved_b", to_json(r.leakage_irb_b)},
            {"per_gate_a", r.leakage_a.value},
            {"per_gate_a_error", r.leakage_a.error},
            {"per_gate_b", r.leakage_b.value},
            {"per_gate_b_error", r.leakage_b.error}}},
          {"lengths", r.reference.lengths},
          {"shots", r.shots},
          {"seeds", r.reference.raw.empty() ? 0 : r.reference.raw.front().size()}};
}

inline void write_curves_csv(std::ostream& f, const RBResult& r) {
  f << "experiment,length,p_gg_mean,p_gg_sem,p_f_a_mean,p_f_a_sem,p_f_b_mean,p_f_b_sem\n" << std::setprecision(17);
  for (const RBCurve* c : {&r.reference, &r.interleaved})
    for (std::size_t i = 0; i < c->lengths.size(); ++i)
      f << (c->interleaved ? "interleaved" : "reference") << ',' << c->lengths[i] << ',' << c->p_gg[i] << ','
        << c->p_gg_sem[i] << ',' << c->p_f_a[i] << ',' << c->p_f_a_sem[i] << ',' << c->p_f_b[i] << ','
        << c->p_f_b_sem[i] << '\n';
}

inline void write_curves_csv(const std::filesystem::path& path, const RBResult& r) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  write_curves_csv(f, r);
}

}  // namespace fgge::rb
