#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <memory>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

#include "fgge/core/errors.hpp"
#include "fgge/core/units.hpp"
#include "fgge/numerics/linalg.hpp"

#include <unsupported/Eigen/KroneckerProduct>

namespace fgge::rb {

inline CMat kron(const CMat& a, const CMat& b) { return Eigen::kroneckerProduct(a, b).eval(); }

// i^k prod_j X_j^{x_j} Z_j^{z_j}; bit j of x and z belongs to qubit j.
struct Pauli {
  std::uint8_t x = 0;
  std::uint8_t z = 0;
  std::uint8_t k = 0;

  bool operator==(const Pauli&) const = default;
  bool hermitian() const { return (k & 1) == (std::popcount(static_cast<unsigned>(x & z)) & 1); }
};

inline Pauli operator*(const Pauli& a, const Pauli& b) {
  // Z^z1 X^x2 = (-1)^{z1.x2} X^x2 Z^z1
  const int sign = std::popcount(static_cast<unsigned>(a.z & b.x)) & 1;
  return {static_cast<std::uint8_t>(a.x ^ b.x), static_cast<std::uint8_t>(a.z ^ b.z),
          static_cast<std::uint8_t>((a.k + b.k + 2 * sign) & 3)};
}

inline bool commute(const Pauli& a, const Pauli& b) {
  return ((std::popcount(static_cast<unsigned>(a.x & b.z)) + std::popcount(static_cast<unsigned>(a.z & b.x))) & 1) == 0;
}

// Qubit 0 is the leftmost tensor factor.
inline CMat pauli_matrix(const Pauli& p, int n) {
  const CMat X = (CMat(2, 2) << 0, 1, 1, 0).finished();
  const CMat Z = (CMat(2, 2) << 1, 0, 0, -1).finished();
  CMat m = CMat::Identity(1, 1);
  for (int j = 0; j < n; ++j) {
    CMat f = CMat::Identity(2, 2);
    if (p.x >> j & 1) f = f * X;
    if (p.z >> j & 1) f = f * Z;
    m = kron(m, f);
  }
  static const cplx ik[4] = {1.0, cplx(0.0, 1.0), -1.0, cplx(0.0, -1.0)};
  return ik[p.k] * m;
}

// Clifford as images of X_0, Z_0, X_1, Z_1 under conjugation (up to global
// phase, which a tableau does not record).
class Clifford {
 public:
  Clifford() : Clifford(2) {}
  explicit Clifford(int n) : n_(n) {
    if (n < 1 || n > 2) throw ConfigError("Clifford: one or two qubits");
    for (int j = 0; j < n; ++j) {
      img_[2 * j] = {static_cast<std::uint8_t>(1 << j), 0, 0};
      img_[2 * j + 1] = {0, static_cast<std::uint8_t>(1 << j), 0};
    }
  }

  int qubits() const { return n_; }
  const Pauli& image(int g) const { return img_[g]; }
  Pauli& image(int g) { return img_[g]; }

  Pauli apply(const Pauli& p) const {
    Pauli r{0, 0, p.k};
    for (int j = 0; j < n_; ++j) {
      if (p.x >> j & 1) r = r * img_[2 * j];
      if (p.z >> j & 1) r = r * img_[2 * j + 1];
    }
    return r;
  }

  std::uint32_t key() const {
    std::uint32_t v = 0;
    for (int g = 0; g < 2 * n_; ++g) v = v << 6 | img_[g].x << 4 | img_[g].z << 2 | img_[g].k;
    return v;
  }
  bool operator==(const Clifford& o) const { return n_ == o.n_ && key() == o.key(); }
  bool is_identity() const { return *this == Clifford(n_); }

  // Images Hermitian and obeying the Pauli commutation relations.
  bool is_symplectic() const {
    for (int a = 0; a < 2 * n_; ++a) {
      if (!img_[a].hermitian() || (img_[a].x == 0 && img_[a].z == 0)) return false;
      for (int b = a + 1; b < 2 * n_; ++b) {
        const bool should = !(a / 2 == b / 2);
        if (commute(img_[a], img_[b]) != should) return false;
      }
    }
    return true;
  }

 private:
  int n_;
  std::array<Pauli, 4> img_{};
};

// Tableau of the unitary product a b (b acts first).
inline Clifford operator*(const Clifford& a, const Clifford& b) {
  Clifford r(a.qubits());
  for (int g = 0; g < 2 * a.qubits(); ++g) r.image(g) = a.apply(b.image(g));
  return r;
}

inline Clifford clifford_from_unitary(const CMat& U) {
  const int n = U.rows() == 2 ? 1 : U.rows() == 4 ? 2 : 0;
  if (n == 0 || U.cols() != U.rows()) throw ConfigError("clifford_from_unitary: expected a 2x2 or 4x4 unitary");
  const int d = 1 << n;
  Clifford c(n);
  for (int g = 0; g < 2 * n; ++g) {
    const Pauli gen = g % 2 == 0 ? Pauli{static_cast<std::uint8_t>(1 << g / 2), 0, 0}
                                 : Pauli{0, static_cast<std::uint8_t>(1 << g / 2), 0};
    const CMat M = U * pauli_matrix(gen, n) * U.adjoint();
    bool found = false;
    for (std::uint8_t x = 0; x < d && !found; ++x)
      for (std::uint8_t z = 0; z < d && !found; ++z) {
        const cplx t = (pauli_matrix({x, z, 0}, n).adjoint() * M).trace() / static_cast<double>(d);
        if (std::abs(std::abs(t) - 1.0) > 1e-8) continue;
        const int k = static_cast<int>(std::lround(std::arg(t) / (0.5 * units::pi))) & 3;
        if (std::abs(t - std::polar(1.0, 0.5 * units::pi * k)) > 1e-8) break;
        c.image(g) = {x, z, static_cast<std::uint8_t>(k)};
        found = true;
      }
    if (!found) throw NumericalError("clifford_from_unitary: unitary is not a Clifford");
  }
  return c;
}

// Native operations: DRAG half and full rotations about X and Y, virtual Z
// by multiples of pi/2, and the CZ.
enum class Native : std::uint8_t { X90, Xm90, Y90, Ym90, X180, Y180, Z90, Zm90, Z180, CZ };

inline constexpr std::array<Native, 9> single_qubit_natives{Native::X90, Native::Xm90, Native::Y90,
                                                            Native::Ym90, Native::X180, Native::Y180,
                                                            Native::Z90,  Native::Zm90, Native::Z180};

inline bool is_pulse(Native g) { return g <= Native::Y180; }
inline bool is_virtual_z(Native g) { return g >= Native::Z90 && g <= Native::Z180; }

inline const char* native_name(Native g) {
  static const char* names[] = {"X90", "-X90", "Y90", "-Y90", "X180", "Y180", "Z90", "-Z90", "Z180", "CZ"};
  return names[static_cast<int>(g)];
}

// Rotation angle and axis of a pulse native.
inline std::pair<double, double> pulse_rotation(Native g) {
  using units::pi;
  switch (g) {
    case Native::X90: return {0.5 * pi, 0.0};
    case Native::Xm90: return {0.5 * pi, pi};
    case Native::Y90: return {0.5 * pi, 0.5 * pi};
    case Native::Ym90: return {0.5 * pi, -0.5 * pi};
    case Native::X180: return {pi, 0.0};
    case Native::Y180: return {pi, 0.5 * pi};
    default: throw ConfigError(std::string("pulse_rotation: not a pulse: ") + native_name(g));
  }
}

inline double virtual_z_angle(Native g) {
  switch (g) {
    case Native::Z90: return 0.5 * units::pi;
    case Native::Zm90: return -0.5 * units::pi;
    case Native::Z180: return units::pi;
    default: throw ConfigError(std::string("virtual_z_angle: not a virtual Z: ") + native_name(g));
  }
}

// Ideal qubit unitaries, in the same conventions as the pulse model:
// R(a, phi) = cos(a/2) - i sin(a/2)(e^{-i phi}|0><1| + h.c.), and a virtual
// Z by theta multiplies level k by e^{i k theta}.
inline CMat native_unitary_1q(Native g) {
  CMat U(2, 2);
  if (is_pulse(g)) {
    const auto [a, phi] = pulse_rotation(g);
    const cplx s = cplx(0.0, -1.0) * std::sin(0.5 * a);
    U << std::cos(0.5 * a), s * std::exp(cplx(0.0, -phi)), s * std::exp(cplx(0.0, phi)), std::cos(0.5 * a);
  } else if (is_virtual_z(g)) {
    U << 1.0, 0.0, 0.0, std::exp(cplx(0.0, virtual_z_angle(g)));
  } else {
    throw ConfigError("native_unitary_1q: CZ is a two-qubit gate");
  }
  return U;
}

inline CMat cz_unitary() {
  CMat U = CMat::Identity(4, 4);
  U(3, 3) = -1.0;
  return U;
}

inline CMat embed(const CMat& u, int qubit) {
  return qubit == 0 ? kron(u, CMat::Identity(2, 2)) : kron(CMat::Identity(2, 2), u);
}

// Minimal-cost words over the natives for every element of the group
// generated by them, found by Dijkstra from the identity. One qubit: cost is
// pulses, then virtual Zs. Two qubits: moves are parallel layers of
// single-qubit Cliffords and the CZ; cost is CZs, then 20 ns slots (the
// longer of the two single-qubit words), then virtual Zs.
class CliffordGroup {
 public:
  // Time-ordered step: a layer (element of the one-qubit group on each
  // qubit) or a CZ.
  struct Step {
    bool cz = false;
    int a = 0;  // one-qubit element index, qubit 0
    int b = 0;  // qubit 1
  };

  explicit CliffordGroup(int n) : n_(n) {
    if (n == 1) build_single();
    else if (n == 2) build_two();
    else throw ConfigError("CliffordGroup: one or two qubits");
  }

  int qubits() const { return n_; }
  std::size_t size() const { return elements_.size(); }
  const Clifford& element(std::size_t i) const { return elements_[i]; }
  const CMat& unitary(std::size_t i) const { return unitaries_[i]; }
  int index_of(const Clifford& c) const {
    const auto it = index_.find(c.key());
    if (it == index_.end()) throw NumericalError("CliffordGroup: element not in group");
    return it->second;
  }
  int identity() const { return 0; }
  int inverse(std::size_t i) const { return index_of(clifford_from_unitary(unitaries_[i].adjoint())); }
  int product(std::size_t later, std::size_t first) const { return index_of(elements_[later] * elements_[first]); }

  // One qubit: the native word of an element.
  const std::vector<Native>& word(std::size_t i) const { return words_.at(i); }
  int pulses(std::size_t i) const { return pulses_.at(i); }
  // Two qubits: layer/CZ steps of an element.
  const std::vector<Step>& steps(std::size_t i) const { return steps_.at(i); }
  const CliffordGroup& single() const { return *single_; }

  // Tableau of a decomposition recompiled step by step.
  Clifford recompile(std::size_t i) const {
    Clifford c(n_);
    if (n_ == 1) {
      for (Native g : words_[i]) c = clifford_from_unitary(native_unitary_1q(g)) * c;
    } else {
      for (const Step& s : steps_[i]) c = step_tableau(s) * c;
    }
    return c;
  }

  double mean_cz() const {
    double m = 0.0;
    for (const auto& s : steps_)
      for (const auto& st : s) m += st.cz;
    return m / static_cast<double>(steps_.size());
  }
  double mean_slots() const {
    double m = 0.0;
    for (std::size_t i = 0; i < steps_.size(); ++i) m += slots_[i];
    return m / static_cast<double>(steps_.size());
  }

 private:
  struct Node {
    long cost;
    int index;
    bool operator>(const Node& o) const { return cost > o.cost || (cost == o.cost && index > o.index); }
  };

  int add(const Clifford& c, const CMat& u) {
    const auto [it, fresh] = index_.emplace(c.key(), static_cast<int>(elements_.size()));
    if (fresh) {
      elements_.push_back(c);
      unitaries_.push_back(u);
    }
    return it->second;
  }

  void build_single() {
    std::vector<Clifford> gen;
    for (Native g : single_qubit_natives) gen.push_back(clifford_from_unitary(native_unitary_1q(g)));
    add(Clifford(1), CMat::Identity(2, 2));
    std::vector<long> cost{0};
    std::vector<int> parent{-1}, move{-1};
    std::vector<bool> done;
    std::priority_queue<Node, std::vector<Node>, std::greater<>> q;
    q.push({0, 0});
    while (!q.empty()) {
      const Node top = q.top();
      q.pop();
      if (top.cost != cost[top.index]) continue;
      for (std::size_t m = 0; m < gen.size(); ++m) {
        const Native g = single_qubit_natives[m];
        const long c = top.cost + (is_pulse(g) ? 100 : 1);
        const Clifford next = gen[m] * elements_[top.index];
        const int before = static_cast<int>(elements_.size());
        const int j = add(next, native_unitary_1q(g) * unitaries_[top.index]);
        if (j == before) {
          cost.push_back(c);
          parent.push_back(top.index);
          move.push_back(static_cast<int>(m));
          q.push({c, j});
        } else if (c < cost[j]) {
          cost[j] = c;
          parent[j] = top.index;
          move[j] = static_cast<int>(m);
          unitaries_[j] = native_unitary_1q(g) * unitaries_[top.index];
          q.push({c, j});
        }
      }
    }
    words_.resize(elements_.size());
    pulses_.resize(elements_.size());
    for (std::size_t i = 0; i < elements_.size(); ++i) {
      for (int j = static_cast<int>(i); parent[j] >= 0; j = parent[j])
        words_[i].insert(words_[i].begin(), single_qubit_natives[move[j]]);
      pulses_[i] = 0;
      for (Native g : words_[i]) pulses_[i] += is_pulse(g);
    }
  }

  Clifford step_tableau(const Step& s) const {
    if (s.cz) return cz_;
    return layers_[s.a * single_->size() + s.b];
  }

  void build_two() {
    single_ = std::make_shared<CliffordGroup>(1);
    const std::size_t m1 = single_->size();
    cz_ = clifford_from_unitary(cz_unitary());
    std::vector<Step> moves;
    std::vector<long> move_cost;
    std::vector<CMat> move_u;
    for (std::size_t a = 0; a < m1; ++a)
      for (std::size_t b = 0; b < m1; ++b) {
        const CMat u = kron(single_->unitary(a), single_->unitary(b));
        layers_.push_back(clifford_from_unitary(u));
        if (a == 0 && b == 0) continue;
        const int vz = static_cast<int>(single_->word(a).size() + single_->word(b).size()) - single_->pulses(a) -
                       single_->pulses(b);
        moves.push_back({false, static_cast<int>(a), static_cast<int>(b)});
        move_cost.push_back(100L * std::max(single_->pulses(a), single_->pulses(b)) + vz);
        move_u.push_back(u);
      }
    moves.push_back({true, 0, 0});
    move_cost.push_back(100000L);
    move_u.push_back(cz_unitary());
    std::vector<Clifford> move_t;
    for (const auto& s : moves) move_t.push_back(step_tableau(s));

    add(Clifford(2), CMat::Identity(4, 4));
    std::vector<long> cost{0};
    std::vector<int> parent{-1}, via{-1};
    std::priority_queue<Node, std::vector<Node>, std::greater<>> q;
    q.push({0, 0});
    while (!q.empty()) {
      const Node top = q.top();
      q.pop();
      if (top.cost != cost[top.index]) continue;
      // A layer never follows a layer: their product is itself one layer.
      const bool after_layer = via[top.index] >= 0 && !moves[via[top.index]].cz;
      for (std::size_t m = 0; m < moves.size(); ++m) {
        if (after_layer && !moves[m].cz) continue;
        const long c = top.cost + move_cost[m];
        const Clifford next = move_t[m] * elements_[top.index];
        const auto it = index_.find(next.key());
        if (it == index_.end()) {
          const int j = add(next, CMat());
          cost.push_back(c);
          parent.push_back(top.index);
          via.push_back(static_cast<int>(m));
          q.push({c, j});
        } else if (c < cost[it->second]) {
          cost[it->second] = c;
          parent[it->second] = top.index;
          via[it->second] = static_cast<int>(m);
          q.push({c, it->second});
        }
      }
    }
    const std::size_t N = elements_.size();
    steps_.resize(N);
    slots_.assign(N, 0);
    for (std::size_t i = 0; i < N; ++i) {
      CMat u = CMat::Identity(4, 4);
      std::vector<int> chain;
      for (int j = static_cast<int>(i); parent[j] >= 0; j = parent[j]) chain.push_back(via[j]);
      for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
        steps_[i].push_back(moves[*it]);
        u = move_u[*it] * u;
        if (!moves[*it].cz) slots_[i] += std::max(single_->pulses(moves[*it].a), single_->pulses(moves[*it].b));
      }
      unitaries_[i] = u;
    }
  }

  int n_;
  std::vector<Clifford> elements_;
  std::vector<CMat> unitaries_;
  std::unordered_map<std::uint32_t, int> index_;
  std::vector<std::vector<Native>> words_;
  std::vector<int> pulses_;
  std::vector<std::vector<Step>> steps_;
  std::vector<int> slots_;
  std::vector<Clifford> layers_;
  Clifford cz_;
  std::shared_ptr<CliffordGroup> single_;
};

inline std::size_t clifford_group_order(int n = 2) { return CliffordGroup(n).size(); }

}  // namespace fgge::rb
