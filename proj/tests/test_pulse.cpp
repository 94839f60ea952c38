#include <gtest/gtest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "fgge/core/units.hpp"
#include "fgge/floquet/drive_table.hpp"
#include "fgge/floquet/spectroscopy.hpp"
#include "fgge/pulse/channel.hpp"
#include "fgge/pulse/collapse.hpp"
#include "fgge/pulse/envelope.hpp"
#include "fgge/pulse/evolve.hpp"
#include "fgge/pulse/lab_frame.hpp"
#include "fgge/pulse/model.hpp"
#include "fgge/pulse/schedule.hpp"
#include "support.hpp"

using namespace fgge;
using namespace fgge::pulse;
using fgge::testing::reference_device;
namespace u = fgge::units;

namespace {

const RotatingFrameModel& model() {
  static const RotatingFrameModel m(reference_device());
  return m;
}

device::DeviceParams uncoupled() {
  auto d = reference_device();
  d.J_tilde = 0.0;
  return d;
}

// 2x2 block of a single-transmon evolution on A with B in g.
Eigen::Matrix2cd qubit_block(const RotatingFrameModel& m, const PulseSchedule& s) {
  const CMat U = evolve_basis(m, s, {m.index(0, 0), m.index(1, 0)});
  Eigen::Matrix2cd b;
  b << U(m.index(0, 0), 0), U(m.index(0, 0), 1), U(m.index(1, 0), 0), U(m.index(1, 0), 1);
  return b;
}

Eigen::Matrix2cd rotation(double angle, double axis) {
  const cplx i(0.0, 1.0);
  Eigen::Matrix2cd n;
  n << 0.0, std::exp(-i * axis), std::exp(i * axis), 0.0;
  return std::cos(0.5 * angle) * Eigen::Matrix2cd::Identity() - i * std::sin(0.5 * angle) * n;
}

double phase_insensitive_distance(const Eigen::Matrix2cd& x, const Eigen::Matrix2cd& y) {
  const cplx ov = (x.adjoint() * y).trace();
  return (x - y * std::conj(ov) / std::abs(ov)).norm();
}

struct GateFixture {
  RotatingFrameModel m{reference_device()};
  floquet::SpectroscopyPoint point;

  explicit GateFixture(double frac) {
    const auto& s = m.statics();
    const double om = frac * s.fgge_resonance();
    const double shift = -u::mhz(218.6) * (frac / 0.15) * (frac / 0.15);
    point = floquet::fgge_spectroscopy(s, om, {s.fgge_resonance() + shift, u::mhz(25.0), 41});
    m.set_fgge_table(std::make_shared<floquet::DriveTable>(floquet::extract_drive_table(s, om, point.omega_fgge, 41)));
  }

  FlatTopPulse pulse(double plateau, double detuning = 0.0) const {
    FlatTopPulse p;
    p.omega = m.fgge_table()->amplitude_max;
    p.carrier = point.omega_fgge + detuning;
    p.plateau = plateau;
    return p;
  }
};

const GateFixture& strong_gate() {
  static const GateFixture g(0.15);
  return g;
}

PulseSchedule cz_like() {
  PulseSchedule s;
  s.add(0.0, strong_gate().pulse(u::ns(88.7), u::mhz(1.6)));
  return s;
}

// Dense Lindblad generator (column stacking) with the documented jump and
// dephasing operators, built without the solver's structure.
CMat liouvillian(const RotatingFrameModel& m, const CollapseSet& c) {
  const int n = m.dim();
  const CMat I = CMat::Identity(n, n);
  CMat H = CMat::Zero(n, n);
  for (int i = 0; i < n; ++i) H(i, i) = m.energies()[i];
  auto kron = [](const CMat& x, const CMat& y) {
    CMat out(x.rows() * y.rows(), x.cols() * y.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = 0; j < x.cols(); ++j) out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    return out;
  };
  const cplx im(0.0, 1.0);
  CMat L = -im * (kron(I, H) - kron(H.transpose(), I));
  auto dissipate = [&](const CMat& J) {
    const CMat JJ = J.adjoint() * J;
    L += kron(J.conjugate(), J) - 0.5 * kron(I, JJ) - 0.5 * kron(JJ.transpose(), I);
  };
  for (const auto& d : c.decay) {
    if (d.level >= m.levels(d.target)) continue;
    CMat J = CMat::Zero(n, n);
    for (int i = 0; i < n; ++i)
      if (m.level(d.target, i) == d.level) J(d.target == Transmon::A ? i - m.levels_b() : i - 1, i) = std::sqrt(d.rate);
    dissipate(J);
  }
  for (const auto& d : c.dephasing) {
    if (d.level >= m.levels(d.target)) continue;
    CMat J = CMat::Zero(n, n);
    for (int i = 0; i < n; ++i)
      if (m.level(d.target, i) == d.level) J(i, i) = std::sqrt(2.0 * d.rate);
    dissipate(J);
  }
  return L;
}

bool json_close(const nlohmann::json& a, const nlohmann::json& b) {
  if (a.is_number() && b.is_number()) {
    const double x = a.get<double>(), y = b.get<double>();
    return std::abs(x - y) <= 1e-12 * std::max({1.0, std::abs(x), std::abs(y)});
  }
  if (a.type() != b.type() || a.size() != b.size()) return false;
  if (a.is_object()) {
    for (auto it = a.begin(); it != a.end(); ++it)
      if (!b.contains(it.key()) || !json_close(it.value(), b.at(it.key()))) return false;
    return true;
  }
  if (a.is_array()) {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!json_close(a[i], b[i])) return false;
    return true;
  }
  return a == b;
}

}  // namespace

// ---- envelopes

TEST(Envelope, FlatTopEndpointsAndPlateau) {
  FlatTopPulse p;
  p.omega = u::ghz(1.0);
  p.carrier = u::ghz(7.5);
  p.plateau = u::ns(80.0);
  EXPECT_DOUBLE_EQ(p.duration(), u::ns(80.0) + 6.0 * p.sigma);
  EXPECT_EQ(envelope_eval(p, 0.0), 0.0);
  EXPECT_EQ(envelope_eval(p, p.duration()), 0.0);
  EXPECT_DOUBLE_EQ(envelope_eval(p, 3.0 * p.sigma), p.omega);
  EXPECT_DOUBLE_EQ(envelope_eval(p, 0.5 * p.duration()), p.omega);
  EXPECT_EQ(envelope_eval(p, -1e-9), 0.0);
  EXPECT_EQ(envelope_eval(p, p.duration() + 1e-9), 0.0);
}

TEST(Envelope, FlatTopIsContinuous) {
  FlatTopPulse p;
  p.omega = 1.0;
  p.carrier = 1.0;
  p.plateau = u::ns(10.0);
  const int n = 20000;
  const double h = p.duration() / n;
  double worst = 0.0;
  for (int k = 0; k < n; ++k) worst = std::max(worst, std::abs(p.envelope((k + 1) * h) - p.envelope(k * h)));
  EXPECT_LT(worst, 2e-3);
  EXPECT_NEAR(p.envelope(p.edge() - 1e-15), 1.0, 1e-9);
  EXPECT_NEAR(p.envelope(1e-15), 0.0, 1e-7);
}

TEST(Envelope, FlatTopValidation) {
  FlatTopPulse p;
  p.carrier = 1.0;
  p.plateau = -1.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p.plateau = 0.0;
  p.carrier = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(Envelope, DragAreaGivesAngle) {
  for (double angle : {u::pi, 0.5 * u::pi}) {
    DragPulse p;
    p.angle = angle;
    const double lam = 1.4;
    const int n = 20000;
    const double h = p.length / n;
    double area = 0.0;
    for (int k = 0; k < n; ++k) area += 0.5 * h * (p.in_phase(k * h, lam) + p.in_phase((k + 1) * h, lam));
    EXPECT_NEAR(area * lam, angle, 1e-6);
  }
}

TEST(Envelope, DragQuadratureIsDerivative) {
  DragPulse p;
  const double alpha = -u::mhz(235.0), dt = 1e-13;
  for (double t : {u::ns(3.0), u::ns(8.0), u::ns(14.0)}) {
    const double deriv = (p.in_phase(t + dt, 1.0) - p.in_phase(t - dt, 1.0)) / (2.0 * dt);
    EXPECT_NEAR(p.quadrature(t, 1.0, alpha), -p.beta * deriv / alpha, 1e-6 * std::abs(deriv / alpha));
  }
  EXPECT_EQ(p.quadrature(0.5 * p.length, 1.0, alpha), 0.0);
}

// ---- single-transmon pulses on the isolated qutrit

TEST(Drag, RotationAngleOnIsolatedQutrit) {
  // Residual from the f-level Stark shift, which the first-order quadrature
  // does not remove.
  const RotatingFrameModel m(uncoupled());
  for (auto [angle, tol] : {std::pair{u::pi, 0.02}, std::pair{0.5 * u::pi, 2e-3}}) {
    DragPulse p;
    p.angle = angle;
    PulseSchedule s;
    s.add(0.0, p);
    const CMat U = evolve_basis(m, s, {m.index(0, 0)});
    const double theta = 2.0 * std::atan2(std::abs(U(m.index(1, 0), 0)), std::abs(U(m.index(0, 0), 0)));
    EXPECT_NEAR(theta, angle, tol) << angle;
  }
}

TEST(Drag, QuadratureSignReducesError) {
  const RotatingFrameModel m(uncoupled());
  auto error = [&](double beta) {
    DragPulse p;
    p.angle = 0.5 * u::pi;
    p.beta = beta;
    PulseSchedule s;
    s.add(0.0, p);
    return phase_insensitive_distance(qubit_block(m, s), rotation(0.5 * u::pi, 0.0));
  };
  EXPECT_LT(error(0.5), error(0.0));
  EXPECT_LT(error(0.0), error(-0.5));
  EXPECT_LT(error(0.5), 2e-3);
}

TEST(Drag, AxisSelectsRotation) {
  const RotatingFrameModel m(uncoupled());
  DragPulse x, y;
  x.angle = y.angle = 0.5 * u::pi;
  y.axis = 0.5 * u::pi;
  PulseSchedule sx, sy;
  sx.add(0.0, x);
  sy.add(0.0, y);
  EXPECT_LT(phase_insensitive_distance(qubit_block(m, sx), rotation(0.5 * u::pi, 0.0)), 2e-3);
  EXPECT_LT(phase_insensitive_distance(qubit_block(m, sy), rotation(0.5 * u::pi, 0.5 * u::pi)), 2e-3);
}

TEST(Drag, EfPulseMovesEToF) {
  const RotatingFrameModel m(uncoupled());
  DragPulse ge, ef;
  ef.transition = Transition::EF;
  ef.beta = 0.0;
  PulseSchedule s;
  s.add(0.0, ge);
  s.then(ef);
  const CMat U = evolve_basis(m, s, {m.index(0, 0)});
  EXPECT_GT(std::norm(U(m.index(2, 0), 0)), 0.995);
}

// ---- virtual Z

TEST(VirtualZ, ZeroAngleIsNoOp) {
  FrameTracker f;
  f[Transmon::A] = 0.3;
  const auto g = apply_virtual_z(f, Transmon::A, 0.0);
  EXPECT_EQ(g[Transmon::A], 0.3);
  EXPECT_EQ(g[Transmon::B], 0.0);
}

TEST(VirtualZ, ComposesAdditivelyModTwoPi) {
  const double a = 2.5, b = 4.1;
  const auto two = apply_virtual_z(apply_virtual_z({}, Transmon::B, a), Transmon::B, b);
  const auto one = apply_virtual_z({}, Transmon::B, a + b);
  EXPECT_NEAR(std::remainder(two[Transmon::B] - one[Transmon::B], u::two_pi), 0.0, 1e-12);
  EXPECT_LE(std::abs(two[Transmon::B]), u::pi);
}

TEST(VirtualZ, ShiftsSubsequentPulsePhase) {
  // vZ(phi) then a pulse about axis a equals the pulse about a - phi followed
  // by the frame rotation.
  const RotatingFrameModel m(uncoupled());
  DragPulse p;
  p.angle = 0.5 * u::pi;
  p.axis = 0.4;
  PulseSchedule framed;
  framed.add(0.0, VirtualZ{Transmon::A, 1.1});
  framed.add(0.0, p);
  DragPulse q = p;
  q.axis = 0.4 - 1.1;
  PulseSchedule plain;
  plain.add(0.0, q);
  Eigen::Matrix2cd z = Eigen::Matrix2cd::Identity();
  z(1, 1) = std::exp(cplx(0.0, 1.1));
  EXPECT_LT(phase_insensitive_distance(qubit_block(m, framed), z * qubit_block(m, plain)), 1e-9);
}

TEST(VirtualZ, ConjugatedXIsY) {
  // vZ(pi/2) X(pi/2) vZ(-pi/2) = Y(-pi/2)
  const RotatingFrameModel m(uncoupled());
  DragPulse x;
  x.angle = 0.5 * u::pi;
  PulseSchedule s;
  s.add(0.0, VirtualZ{Transmon::A, 0.5 * u::pi});
  s.add(0.0, x);
  s.then(VirtualZ{Transmon::A, -0.5 * u::pi});
  DragPulse y = x;
  y.axis = -0.5 * u::pi;
  PulseSchedule t;
  t.add(0.0, y);
  EXPECT_LT(phase_insensitive_distance(qubit_block(m, s), qubit_block(m, t)), 1e-9);
  EXPECT_LT(phase_insensitive_distance(qubit_block(m, s), rotation(-0.5 * u::pi, 0.5 * u::pi)), 2e-3);
}

TEST(VirtualZ, PiFramesAroundXReverseIt) {
  // vZ(pi) X(pi/2) vZ(pi) = X(-pi/2)
  const RotatingFrameModel m(uncoupled());
  DragPulse x;
  x.angle = 0.5 * u::pi;
  PulseSchedule s;
  s.add(0.0, VirtualZ{Transmon::A, u::pi});
  s.add(0.0, x);
  s.then(VirtualZ{Transmon::A, u::pi});
  EXPECT_LT(phase_insensitive_distance(qubit_block(m, s), rotation(-0.5 * u::pi, 0.0)), 2e-3);
}

// ---- schedules

TEST(Schedule, OrderingAndDuration) {
  PulseSchedule s;
  DragPulse p;
  s.add(u::ns(40.0), p);
  s.add(0.0, p);
  s.add(u::ns(40.0), VirtualZ{Transmon::B, 1.0});
  ASSERT_EQ(s.entries().size(), 3u);
  EXPECT_EQ(s.entries()[0].start, 0.0);
  EXPECT_TRUE(std::holds_alternative<DragPulse>(s.entries()[1].op));
  EXPECT_TRUE(std::holds_alternative<VirtualZ>(s.entries()[2].op));
  EXPECT_DOUBLE_EQ(s.duration(), u::ns(60.0));
  s.wait(u::ns(15.0));
  EXPECT_DOUBLE_EQ(s.duration(), u::ns(75.0));
  EXPECT_NEAR(s.final_frames()[Transmon::B], 1.0, 1e-15);
  EXPECT_THROW(s.add(-1.0, p), ConfigError);
}

TEST(Schedule, JsonRoundTrip) {
  PulseSchedule s;
  FlatTopPulse f;
  f.omega = u::ghz(1.16);
  f.carrier = u::ghz(7.5237);
  f.phase = 0.25;
  f.plateau = u::ns(88.7);
  DragPulse d;
  d.target = Transmon::B;
  d.transition = Transition::EF;
  d.angle = 0.5 * u::pi;
  d.axis = 0.3;
  d.beta = 0.4;
  d.detuning = u::mhz(-1.0);
  s.add(0.0, d);
  s.then(f);
  s.then(VirtualZ{Transmon::A, -0.7});
  s.wait(u::ns(10.0));
  const auto j = schedule_to_json(s);
  const auto back = schedule_from_json(j);
  EXPECT_TRUE(json_close(schedule_to_json(back), j)) << schedule_to_json(back).dump() << "\n" << j.dump();
  EXPECT_NEAR(back.duration(), s.duration(), 1e-18);
  const auto& e = std::get<DragPulse>(back.entries()[0].op);
  EXPECT_EQ(e.target, Transmon::B);
  EXPECT_EQ(e.transition, Transition::EF);
  EXPECT_NEAR(e.detuning, d.detuning, 1e-6);
}

TEST(Schedule, JsonRejectsBadRecords) {
  EXPECT_THROW(schedule_from_json(nlohmann::json::parse(R"({"entries":[{"type":"square","start_ns":0}]})")), ConfigError);
  EXPECT_THROW(schedule_from_json(nlohmann::json::parse(R"([1,2])")), ConfigError);
}

// ---- collapse operators and open evolution

TEST(Collapse, RatesNonNegative) {
  const auto c = CollapseSet::from_device(reference_device(), 4, 3);
  EXPECT_FALSE(c.empty());
  for (const auto* v : {&c.decay, &c.dephasing})
    for (const auto& ch : *v) EXPECT_GE(ch.rate, 0.0);
  EXPECT_NEAR(c.decay[0].rate, 1.0 / reference_device().qubit_a.T1_ge, 1e-9);
  EXPECT_THROW(CollapseSet::from_device(reference_device(), 4, 3, 0.0), ConfigError);
}

TEST(Collapse, InfiniteTimesAreEmpty) {
  auto d = reference_device();
  for (auto* q : {&d.qubit_a, &d.qubit_b})
    q->T1_ge = q->T1_ef = q->T2_ge = q->T2_ef = std::numeric_limits<double>::infinity();
  EXPECT_TRUE(CollapseSet::from_device(d, 4, 3).empty());
}

TEST(Lindblad, IdleDecayLaw) {
  const auto& m = model();
  const double t = u::us(2.0);
  PulseSchedule s;
  s.wait(t);
  CMat rho = CMat::Zero(m.dim(), m.dim());
  rho(m.index(1, 0), m.index(1, 0)) = 1.0;
  const CMat out = lindblad_evolve(m, s, rho, CollapseSet::from_device(reference_device(), 4, 3));
  EXPECT_NEAR(out(m.index(1, 0), m.index(1, 0)).real(), std::exp(-t / reference_device().qubit_a.T1_ge), 1e-4);
  EXPECT_LT(numerics::max_abs(CMat(out - out.adjoint())), 1e-9);
}

TEST(Lindblad, IdleCoherenceDecaysAtT2) {
  const auto& m = model();
  const double t = u::us(2.0);
  PulseSchedule s;
  s.wait(t);
  CMat rho = CMat::Zero(m.dim(), m.dim());
  for (int i : {m.index(0, 0), m.index(0, 1)})
    for (int j : {m.index(0, 0), m.index(0, 1)}) rho(i, j) = 0.5;
  const CMat out = lindblad_evolve(m, s, rho, CollapseSet::from_device(reference_device(), 4, 3));
  EXPECT_NEAR(std::abs(out(m.index(0, 0), m.index(0, 1))), 0.5 * std::exp(-t / reference_device().qubit_b.T2_ge), 1e-4);
}

TEST(Lindblad, ClosedLimitMatchesSchrodinger) {
  const auto& g = strong_gate();
  PulseSchedule s;
  DragPulse x;
  x.angle = 0.5 * u::pi;
  s.add(0.0, x);
  s.then(g.pulse(u::ns(40.0)));
  CVec psi = CVec::Zero(g.m.dim());
  psi[g.m.index(0, 0)] = std::sqrt(0.3);
  psi[g.m.index(0, 1)] = cplx(0.0, std::sqrt(0.7));
  const CVec out = schrodinger_evolve(g.m, s, psi);
  EXPECT_NEAR(out.norm(), 1.0, 1e-8);
  const CMat rho = lindblad_evolve(g.m, s, psi * psi.adjoint(), CollapseSet::none());
  EXPECT_LT(numerics::max_abs(CMat(rho - out * out.adjoint())), 1e-8);
}

TEST(Lindblad, InputValidation) {
  const auto& m = model();
  PulseSchedule s;
  s.wait(u::ns(1.0));
  CMat rho = CMat::Zero(m.dim(), m.dim());
  rho(0, 1) = 1.0;
  EXPECT_THROW(lindblad_evolve(m, s, rho, CollapseSet::none()), ConfigError);
  EXPECT_THROW(lindblad_evolve(m, s, CMat::Zero(m.dim(), m.dim()), CollapseSet::none()), ConfigError);
  EXPECT_THROW(schrodinger_evolve(m, s, CVec::Zero(m.dim())), ConfigError);
}

TEST(Schrodinger, EmptyScheduleOnlyPhases) {
  const auto& m = model();
  PulseSchedule s;
  s.wait(u::ns(50.0));
  const CMat U = evolve_basis(m, s, {m.index(1, 1), m.index(2, 0)});
  EXPECT_NEAR(std::abs(U(m.index(1, 1), 0)), 1.0, 1e-12);
  EXPECT_NEAR(std::remainder(std::arg(U(m.index(1, 1), 0)) + m.chi() * u::ns(50.0), u::two_pi), 0.0, 1e-9);
  EXPECT_NEAR(std::abs(U(m.index(2, 0), 1)), 1.0, 1e-12);
}

TEST(Model, FgGePulseNeedsTable) {
  PulseSchedule s;
  FlatTopPulse f;
  f.omega = u::ghz(0.5);
  f.carrier = u::ghz(7.6);
  s.add(0.0, f);
  EXPECT_THROW(model().compile(s), ConfigError);
  auto big = strong_gate().pulse(u::ns(10.0));
  big.omega *= 1.2;
  PulseSchedule t;
  t.add(0.0, big);
  EXPECT_THROW(strong_gate().m.compile(t), ConfigError);
}

// ---- channels

TEST(Channel, IdentityScheduleIsIdentity) {
  const auto& m = model();
  const auto ch = channel_from_schedule(m, PulseSchedule{}, CollapseSet::none());
  EXPECT_LT(numerics::max_abs(CMat(ch.S - CMat::Identity(ch.S.rows(), ch.S.cols()))), 1e-12);
}

TEST(Channel, IdleMatchesLiouvillianExponential) {
  const auto& m = model();
  const double t = u::ns(300.0);
  const auto c = CollapseSet::from_device(reference_device(), 4, 3);
  PulseSchedule s;
  s.wait(t);
  const auto ch = channel_from_schedule(m, s, c);
  const CMat oracle = (liouvillian(m, c) * t).exp();
  EXPECT_LT(numerics::max_abs(CMat(ch.S - oracle)), 1e-6);
  EXPECT_LT(ch.trace_preservation_error(), 1e-6);
  EXPECT_GT(ch.choi_min_eigenvalue(), -1e-8);
}

TEST(Channel, GateIsTracePreservingAndPositive) {
  const auto& g = strong_gate();
  const auto ch = channel_from_schedule(g.m, cz_like(), CollapseSet::from_device(reference_device(), 4, 3));
  EXPECT_LT(ch.trace_preservation_error(), 1e-6);
  EXPECT_GT(ch.choi_min_eigenvalue(), -1e-8);
}

TEST(Channel, SequentialComposition) {
  const auto& m = model();
  const auto c = CollapseSet::from_device(reference_device(), 4, 3);
  DragPulse a, b;
  a.angle = 0.5 * u::pi;
  b.target = Transmon::B;
  b.axis = 0.7;
  PulseSchedule s1, s2;
  s1.add(0.0, a);
  s2.add(0.0, b);
  PulseSchedule both = s1;
  both.append(s2);
  const auto joint = channel_from_schedule(m, both, c);
  const auto composed = channel_from_schedule(m, s2, c).after(channel_from_schedule(m, s1, c));
  EXPECT_LT(numerics::max_abs(CMat(joint.S - composed.S)), 1e-6);
}

TEST(Channel, UnitaryPathMatchesDensityPath) {
  const auto& m = model();
  DragPulse a;
  a.angle = 0.5 * u::pi;
  PulseSchedule s;
  s.add(0.0, a);
  const auto ch = channel_from_schedule(m, s, CollapseSet::none());
  CMat rho = CMat::Zero(m.dim(), m.dim());
  rho(m.index(0, 1), m.index(0, 1)) = 1.0;
  const CMat direct = lindblad_evolve(m, s, rho, CollapseSet::none());
  EXPECT_LT(numerics::max_abs(CMat(ch.apply(rho) - direct)), 1e-8);
}

// ---- fidelity

TEST(Fidelity, IdealCzIsOne) {
  const auto& m = model();
  CMat U = CMat::Identity(m.dim(), m.dim());
  U(m.index(1, 1), m.index(1, 1)) = -1.0;
  const auto f = average_gate_fidelity(QuantumChannel::unitary(U), m.computational(), ideal_cz());
  EXPECT_NEAR(f.average, 1.0, 1e-12);
  EXPECT_NEAR(f.leakage(), 0.0, 1e-12);
}

TEST(Fidelity, DepolarizingIsOneOverD) {
  // Phi(rho) = Tr_P(rho) I_P / d on the computational subspace P; with
  // F = (d F_pro + retained) / (d + 1) this gives 1/d.
  const auto& m = model();
  const int n = m.dim();
  const auto sub = m.computational();
  QuantumChannel ch{n, CMat::Zero(n * n, n * n)};
  for (int i : sub)
    for (int a : sub) ch.S(a + n * a, i + n * i) = 0.25;
  const auto f = average_gate_fidelity(ch, sub, ideal_cz());
  EXPECT_NEAR(f.average, 0.25, 1e-12);
  EXPECT_NEAR(f.process, 1.0 / 16.0, 1e-12);
}

TEST(Fidelity, MonotoneInCoherenceTimes) {
  const auto& g = strong_gate();
  const auto s = cz_like();
  const auto comp = g.m.computational();
  const CMat U = evolve_basis(g.m, s, comp);
  CMat target = CMat::Zero(4, 4);
  for (int k = 0; k < 4; ++k) target(k, k) = std::polar(1.0, std::arg(U(comp[k], k)));
  auto fid = [&](double k) {
    const auto ch = channel_from_schedule(g.m, s, CollapseSet::from_device(reference_device(), 4, 3, k));
    return average_gate_fidelity(ch, comp, target).average;
  };
  const double f1 = fid(1.0), f2 = fid(0.5), f3 = fid(0.25);
  EXPECT_GT(f1, f2);
  EXPECT_GT(f2, f3);
}

// ---- lab-frame cross-check of the fg-ge transfer

TEST(LabFrame, PiPulseTransfersGeToFg) {
  const GateFixture g(0.05);
  const double tau = u::pi / (2.0 * g.point.g_fgge);
  PulseSchedule once;
  once.add(0.0, g.pulse(tau));
  PulseSchedule twice = once;
  twice.append(once);
  const LabFrameSimulator lab(reference_device());
  const auto& sys = lab.statics();
  const CMat x1 = lab.run(once, {sys.index(0, 1)});
  EXPECT_GT(std::norm(x1(sys.index(2, 0), 0)), 0.98);
  const CMat x2 = lab.run(twice, {sys.index(0, 1)});
  EXPECT_GT(std::norm(x2(sys.index(0, 1), 0)), 0.96);
  const CMat u1 = evolve_basis(g.m, once, {g.m.index(0, 1)});
  EXPECT_NEAR(std::norm(u1(g.m.index(2, 0), 0)), std::norm(x1(sys.index(2, 0), 0)), 2e-3);
}

TEST(LabFrame, IdleIsPhaseOnlyInQubitFrame) {
  const LabFrameSimulator lab(reference_device());
  const auto& sys = lab.statics();
  PulseSchedule s;
  s.wait(u::ns(20.0));
  const CMat x = lab.run(s, {sys.index(0, 0), sys.index(1, 0)});
  EXPECT_NEAR(std::abs(x(sys.index(0, 0), 0) - 1.0), 0.0, 1e-9);
  EXPECT_NEAR(std::abs(x(sys.index(1, 0), 1) - 1.0), 0.0, 1e-9);
}

TEST(LabFrame, DragMatchesRotatingFrame) {
  const LabFrameSimulator lab(reference_device());
  const auto& sys = lab.statics();
  const auto& m = model();
  DragPulse p;
  p.angle = 0.5 * u::pi;
  p.axis = 0.3;
  PulseSchedule s;
  s.add(0.0, p);
  const CMat x = lab.run(s, {sys.index(0, 0)});
  const CMat y = evolve_basis(m, s, {m.index(0, 0)});
  EXPECT_NEAR(std::norm(x(sys.index(1, 0), 0)), std::norm(y(m.index(1, 0), 0)), 5e-3);
  EXPECT_NEAR(std::remainder(std::arg(x(sys.index(1, 0), 0) / x(sys.index(0, 0), 0)) -
                                 std::arg(y(m.index(1, 0), 0) / y(m.index(0, 0), 0)),
                             u::two_pi),
              0.0, 0.05);
}
