#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "fgge/calib/context.hpp"
#include "fgge/pulse/collapse.hpp"
#include "fgge/rb/run.hpp"
#include "support.hpp"

using namespace fgge;
using namespace fgge::rb;

namespace {

const CliffordGroup& two_qubit() {
  static const CliffordGroup g(2);
  return g;
}

// Equal up to a global phase.
bool same_up_to_phase(const CMat& a, const CMat& b, double tol = 1e-9) {
  Eigen::Index r = 0, c = 0;
  b.cwiseAbs().maxCoeff(&r, &c);
  const cplx ph = a(r, c) / b(r, c);
  if (std::abs(std::abs(ph) - 1.0) > tol) return false;
  return (a - ph * b).cwiseAbs().maxCoeff() < tol;
}

// p rho + (1 - p) Tr(rho) I/d
pulse::QuantumChannel depolarizing(int d, double p) {
  pulse::QuantumChannel ch = pulse::QuantumChannel::identity(d);
  ch.S *= p;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) ch.S(i + d * i, j + d * j) += (1.0 - p) / d;
  return ch;
}

std::vector<double> default_lengths() {
  const RBOptions o;
  return {o.lengths.begin(), o.lengths.end()};
}

}  // namespace

TEST(CliffordGroup, Orders) {
  EXPECT_EQ(two_qubit().size(), 11520u);
  EXPECT_EQ(two_qubit().single().size(), 24u);
}

TEST(CliffordGroup, AllTableauxSymplecticAndDistinct) {
  const auto& g = two_qubit();
  std::set<std::uint32_t> keys;
  for (std::size_t i = 0; i < g.size(); ++i) {
    ASSERT_TRUE(g.element(i).is_symplectic()) << i;
    keys.insert(g.element(i).key());
  }
  EXPECT_EQ(keys.size(), g.size());
}

TEST(CliffordGroup, IdentityIsItsOwnInverse) {
  const auto& g = two_qubit();
  EXPECT_TRUE(g.element(g.identity()).is_identity());
  EXPECT_EQ(g.inverse(g.identity()), g.identity());
}

TEST(CliffordGroup, InversesAndAssociativity) {
  const auto& g = two_qubit();
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(g.size()) - 1);
  for (int t = 0; t < 500; ++t) {
    const int a = pick(rng), b = pick(rng), c = pick(rng);
    EXPECT_EQ(g.product(g.inverse(a), a), g.identity());
    EXPECT_EQ(g.product(a, g.inverse(a)), g.identity());
    EXPECT_EQ(g.product(g.product(a, b), c), g.product(a, g.product(b, c)));
  }
}

TEST(CliffordGroup, TableauMatchesUnitary) {
  const auto& g = two_qubit();
  for (std::size_t i = 0; i < g.size(); i += 37) EXPECT_EQ(clifford_from_unitary(g.unitary(i)), g.element(i));
}

TEST(CliffordGroup, EveryDecompositionRecompiles) {
  const auto& g = two_qubit();
  for (std::size_t i = 0; i < g.size(); ++i) ASSERT_EQ(g.recompile(i), g.element(i)) << i;
  for (std::size_t i = 0; i < g.single().size(); ++i) ASSERT_EQ(g.single().recompile(i), g.single().element(i)) << i;
}

TEST(CliffordGroup, CzCountClasses) {
  const auto& g = two_qubit();
  std::map<int, int> classes;
  for (std::size_t i = 0; i < g.size(); ++i) {
    int n = 0;
    for (const auto& s : g.steps(i)) n += s.cz ? 1 : 0;
    ++classes[n];
  }
  EXPECT_EQ(classes[0], 576);
  EXPECT_EQ(classes[1], 5184);
  EXPECT_EQ(classes[2], 5184);
  EXPECT_EQ(classes[3], 576);
  EXPECT_DOUBLE_EQ(g.mean_cz(), 1.5);
}

TEST(CliffordGroup, VirtualZCostsNoPulse) {
  const auto& s = two_qubit().single();
  const int z = s.index_of(clifford_from_unitary(native_unitary_1q(Native::Z90)));
  EXPECT_EQ(s.pulses(z), 0);
  const int x = s.index_of(clifford_from_unitary(native_unitary_1q(Native::X90)));
  EXPECT_EQ(s.pulses(x), 1);
}

TEST(Compiler, PhysicalOperationsReproduceElement) {
  const auto& g = two_qubit();
  for (std::size_t i = 0; i < g.size(); i += 11)
    ASSERT_TRUE(same_up_to_phase(ideal_unitary(compile_element(g, static_cast<int>(i))), g.unitary(i))) << i;
}

TEST(Compiler, SlotsCarryAtMostOnePulsePerQubit) {
  const auto& g = two_qubit();
  for (std::size_t i = 0; i < g.size(); i += 7)
    for (const auto& op : compile_element(g, static_cast<int>(i)))
      if (op.kind == PhysicalOp::Kind::Slot) {
        EXPECT_TRUE(op.pulse_a >= 0 || op.pulse_b >= 0);
        EXPECT_TRUE(op.pulse_a < 0 || is_pulse(static_cast<Native>(op.pulse_a)));
        EXPECT_TRUE(op.pulse_b < 0 || is_pulse(static_cast<Native>(op.pulse_b)));
      }
}

TEST(Sequence, EmptySequenceRecoversWithIdentity) {
  const auto s = sample_sequence(two_qubit(), {0, 3, false});
  EXPECT_TRUE(s.elements.empty());
  EXPECT_EQ(s.recovery, two_qubit().identity());
}

TEST(Sequence, RandomSequencesComposeToIdentity) {
  const auto& g = two_qubit();
  for (int k = 0; k < 1000; ++k) {
    const RBSequenceSpec spec{1 + k % 50, sequence_seed(11, 0, k), k % 2 == 1};
    ASSERT_TRUE(compose_sequence(g, sample_sequence(g, spec)).is_identity()) << k;
  }
}

TEST(Sequence, SeedDeterminesSequence) {
  const auto& g = two_qubit();
  const auto a = sample_sequence(g, {25, 42, false});
  const auto b = sample_sequence(g, {25, 42, false});
  const auto c = sample_sequence(g, {25, 43, false});
  EXPECT_EQ(a.elements, b.elements);
  EXPECT_EQ(a.recovery, b.recovery);
  EXPECT_NE(a.elements, c.elements);
}

TEST(Sequence, InterleavedSharesRandomCliffords) {
  const auto& g = two_qubit();
  const auto r = sample_sequence(g, {12, 5, false});
  const auto i = sample_sequence(g, {12, 5, true});
  EXPECT_EQ(r.elements, i.elements);
}

TEST(Sequence, SingleQubitInterleavingRejected) {
  const CliffordGroup one(1);
  EXPECT_THROW(sample_sequence(one, {3, 1, true}), ConfigError);
}

TEST(Simulation, IdealChannelsSurvivePerfectly) {
  IdealChannels ch;
  RBOptions opt;
  opt.seeds = 4;
  for (bool il : {false, true}) {
    const auto c = run_rb_curve(two_qubit(), ch, opt, il);
    for (double p : c.p_gg) EXPECT_NEAR(p, 1.0, 1e-10);
  }
}

TEST(Simulation, DepolarizingNoiseRecoveredFromDecay) {
  IdealChannels ch;
  RBOptions opt;
  opt.clifford_noise = depolarizing(4, 0.97);
  opt.lengths = {1, 2, 4, 8, 12, 17, 25, 35, 50};
  const auto c = run_rb_curve(two_qubit(), ch, opt, false);
  // Gate-independent noise: every seed decays identically to 1/4 + 3/4 p^(s+1).
  for (std::size_t i = 0; i < c.lengths.size(); ++i)
    EXPECT_NEAR(c.p_gg[i], 0.25 + 0.75 * std::pow(0.97, c.lengths[i] + 1), 1e-10);
  const std::vector<double> s(opt.lengths.begin(), opt.lengths.end());
  const auto f = fit_rb_decay(s, c.p_gg);
  EXPECT_FALSE(f.flagged);
  EXPECT_NEAR(f.p, 0.97, 0.01 * 0.97);
  EXPECT_LT(f.fit.residual_norm / std::sqrt(static_cast<double>(s.size())), 1e-3);
}

TEST(DecayFit, ExactDataRecovered) {
  const auto s = default_lengths();
  std::vector<double> y;
  for (double x : s) y.push_back(0.5 + 0.5 * std::pow(0.95, x));
  const auto f = fit_rb_decay(s, y);
  EXPECT_FALSE(f.flagged);
  EXPECT_NEAR(f.p, 0.95, 1e-6);
  EXPECT_NEAR(f.A, 0.5, 1e-6);
  EXPECT_NEAR(f.B, 0.5, 1e-6);
}

TEST(DecayFit, NoisyDataMonteCarlo) {
  const auto s = default_lengths();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.01);
  const int trials = 400;
  int covered = 0;
  double sq = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> y;
    for (double x : s) y.push_back(0.5 + 0.5 * std::pow(0.95, x) + noise(rng));
    const auto f = fit_rb_decay(s, y);
    sq += (f.p - 0.95) * (f.p - 0.95);
    if (std::abs(f.p - 0.95) < 2.0 * f.p_error) ++covered;
  }
  EXPECT_LT(std::sqrt(sq / trials), 0.005);
  // Reported errors cover the truth at about the 2-sigma rate.
  EXPECT_GT(covered, 0.88 * trials);
}

TEST(DecayFit, ConstantDataFlagged) {
  const auto s = default_lengths();
  const std::vector<double> y(s.size(), 0.6);
  EXPECT_TRUE(fit_rb_decay(s, y).flagged);
}

TEST(DecayFit, TooFewPointsRejected) {
  EXPECT_THROW(fit_rb_decay({1, 2, 3}, {0.9, 0.8, 0.7}), ConfigError);
  EXPECT_THROW(fit_rb_decay({1, 2, 3, 4}, {0.9, 0.8, 0.7}), ConfigError);
}

TEST(InterleavedFidelity, ReferenceExample) {
  const auto f = gate_fidelity_from_p(0.8958, 0.9267);
  EXPECT_NEAR(f.fidelity, 0.975, 1e-4);
  EXPECT_TRUE(f.consistent);
}

TEST(InterleavedFidelity, EqualDecaysMeanPerfectGate) {
  EXPECT_DOUBLE_EQ(gate_fidelity_from_p(0.93, 0.93).fidelity, 1.0);
}

TEST(InterleavedFidelity, SingleQubitDimension) {
  EXPECT_NEAR(gate_fidelity_from_p(0.98, 0.99, 2).fidelity, 1.0 - 0.5 * (1.0 - 0.98 / 0.99), 1e-15);
}

TEST(InterleavedFidelity, InvalidInputs) {
  EXPECT_THROW(gate_fidelity_from_p(0.9, 0.0), ConfigError);
  EXPECT_FALSE(gate_fidelity_from_p(0.95, 0.9).consistent);
}

TEST(CliffordFidelity, FullDepolarizationIsOneOverD) {
  EXPECT_DOUBLE_EQ(clifford_fidelity(0.0), 0.25);
  EXPECT_DOUBLE_EQ(clifford_fidelity(1.0), 1.0);
}

TEST(LeakageFit, SyntheticRatesRecovered) {
  const double up = 0.007, down = 0.1, G = up + down;
  std::vector<double> s;
  for (int x = 1; x <= 60; x += 3) s.push_back(x);
  std::vector<double> y;
  for (double x : s) y.push_back(up / G * (1.0 - std::exp(-G * x)));
  const auto f = fit_leakage(s, y);
  EXPECT_FALSE(f.flagged);
  EXPECT_NEAR(f.gamma_up, up, 0.1 * up);
  EXPECT_NEAR(f.gamma_down, down, 0.1 * down);
}

TEST(LeakageFit, ConstantDataFlagged) {
  const auto s = default_lengths();
  EXPECT_TRUE(fit_leakage(s, std::vector<double>(s.size(), 0.0)).flagged);
}

TEST(LeakageFit, IdenticalCurvesGiveNoGateLeakage) {
  const auto s = default_lengths();
  std::vector<double> y;
  for (double x : s) y.push_back(0.05 * (1.0 - std::exp(-0.08 * x)));
  const auto f = fit_leakage(s, y);
  EXPECT_DOUBLE_EQ(leakage_per_gate(f, f).value, 0.0);
}

TEST(Options, Validation) {
  RBOptions o;
  o.lengths = {};
  EXPECT_THROW(o.validate(), ConfigError);
  o.lengths = {1, 5, 3};
  EXPECT_THROW(o.validate(), ConfigError);
  o.lengths = {1, 2};
  o.seeds = 0;
  EXPECT_THROW(o.validate(), ConfigError);
}

TEST(Determinism, SameSeedSameResultAnyWorkerCount) {
  IdealChannels ch;
  RBOptions opt;
  opt.lengths = {0, 2, 5, 9};
  opt.seeds = 6;
  opt.seed = 99;
  opt.clifford_noise = depolarizing(4, 0.9);
  const auto a = run_rb(two_qubit(), ch, opt);
  opt.workers = 3;
  const auto b = run_rb(two_qubit(), ch, opt);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  for (std::size_t l = 0; l < a.reference.raw.size(); ++l)
    for (std::size_t k = 0; k < a.reference.raw[l].size(); ++k) {
      EXPECT_EQ(a.reference.raw[l][k].p_gg, b.reference.raw[l][k].p_gg);
      EXPECT_EQ(a.interleaved.raw[l][k].p_gg, b.interleaved.raw[l][k].p_gg);
    }
}

TEST(ModelChannels, SlotChannelsArePhysical) {
  calib::CalibrationContext ctx(fgge::testing::reference_device());
  const auto model = ctx.model_for(0.0);
  const auto col = pulse::CollapseSet::from_device(fgge::testing::reference_device(), model->levels_a(), model->levels_b());
  ModelChannels ch(model, col, {});
  PhysicalOp x;
  x.pulse_a = static_cast<int>(Native::X180);
  x.pulse_b = static_cast<int>(Native::Y90);
  const auto& c = ch.get(x);
  EXPECT_LT(c.trace_preservation_error(), 1e-9);
  // X180 on A takes |g,g> to |e,*> nearly fully.
  const int n = ch.dim();
  CMat rho = CMat::Zero(n, n);
  rho(0, 0) = 1.0;
  const CMat out = c.apply(rho);
  double pe = 0.0;
  for (int b = 0; b < ch.levels_b(); ++b) pe += out(model->index(1, b), model->index(1, b)).real();
  EXPECT_GT(pe, 0.995);
  const Eigen::SelfAdjointEigenSolver<CMat> es((out + out.adjoint()) / 2.0);
  EXPECT_GT(es.eigenvalues().minCoeff(), -1e-9);
  PhysicalOp cz{PhysicalOp::Kind::CZ};
  EXPECT_THROW(ch.get(cz), ConfigError);
}

TEST(Shots, SamplingIsSeededAndUnbiased) {
  RVec p(4);
  p << 0.5, 0.3, 0.15, 0.05;
  EXPECT_EQ(sample_populations(p, 1000, 7), sample_populations(p, 1000, 7));
  EXPECT_NE(sample_populations(p, 1000, 7), sample_populations(p, 1000, 8));
  RVec mean = RVec::Zero(4);
  const int draws = 200;
  for (int k = 0; k < draws; ++k) {
    const RVec f = sample_populations(p, 1000, 100 + k);
    EXPECT_NEAR(f.sum(), 1.0, 1e-12);
    EXPECT_NEAR((f * 1000.0 - (f * 1000.0).array().round().matrix()).norm(), 0.0, 1e-9);
    mean += f / draws;
  }
  // Standard error of the mean is below 0.0012 for every entry.
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(mean[i], p[i], 0.005);
}

TEST(Shots, SampledCurvesStayNearExact) {
  IdealChannels ch;
  RBOptions opt;
  opt.lengths = {0, 2, 5, 9};
  opt.seeds = 4;
  opt.clifford_noise = depolarizing(4, 0.9);
  const auto exact = run_rb_curve(two_qubit(), ch, opt, false);
  opt.shots = 4000;
  const auto sampled = run_rb_curve(two_qubit(), ch, opt, false);
  EXPECT_EQ(sampled.p_gg, run_rb_curve(two_qubit(), ch, opt, false).p_gg);
  for (std::size_t i = 0; i < exact.p_gg.size(); ++i) EXPECT_NEAR(sampled.p_gg[i], exact.p_gg[i], 0.02);
}
