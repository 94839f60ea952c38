#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "fgge/rb/clifford.hpp"

namespace fgge::rb {

struct RBSequenceSpec {
  int length = 0;
  std::uint64_t seed = 0;
  bool interleaved = false;
};

struct RBSequence {
  std::vector<int> elements;  // random Cliffords, in time order
  int recovery = 0;
  bool interleaved = false;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed of the k-th random sequence at length index l. Reference and
// interleaved runs share their random Cliffords.
inline std::uint64_t sequence_seed(std::uint64_t base, std::size_t l, std::size_t k) {
  return splitmix64(splitmix64(base ^ splitmix64(l + 1)) ^ (k + 1));
}

// Uniform i.i.d. elements; the recovery inverts the product including the
// interleaved CZs.
inline RBSequence sample_sequence(const CliffordGroup& group, const RBSequenceSpec& spec) {
  if (spec.length < 0) throw ConfigError("sample_sequence: negative length");
  if (group.qubits() != 2 && spec.interleaved) throw ConfigError("sample_sequence: interleaving needs two qubits");
  RBSequence s;
  s.interleaved = spec.interleaved;
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(group.size()) - 1);
  Clifford total(group.qubits());
  const Clifford cz = group.qubits() == 2 ? clifford_from_unitary(cz_unitary()) : Clifford(1);
  for (int i = 0; i < spec.length; ++i) {
    s.elements.push_back(pick(rng));
    total = group.element(s.elements.back()) * total;
    if (spec.interleaved) total = cz * total;
  }
  s.recovery = group.inverse(group.index_of(total));
  return s;
}

// Tableau of the whole sequence, recovery included.
inline Clifford compose_sequence(const CliffordGroup& group, const RBSequence& s) {
  Clifford total(group.qubits());
  const Clifford cz = group.qubits() == 2 ? clifford_from_unitary(cz_unitary()) : Clifford(1);
  for (int e : s.elements) {
    total = group.element(e) * total;
    if (s.interleaved) total = cz * total;
  }
  return group.element(s.recovery) * total;
}

// Physical operations: virtual Z on one qubit, a 20 ns slot with a pulse (or
// nothing) on each qubit, or the CZ.
struct PhysicalOp {
  enum class Kind : std::uint8_t { VirtualZ, Slot, CZ } kind = Kind::Slot;
  int qubit = 0;               // VirtualZ
  Native gate = Native::Z90;   // VirtualZ
  int pulse_a = -1;            // Slot: Native index of a pulse, -1 = idle
  int pulse_b = -1;
};

// Schedules a layer: the i-th pulse of each qubit shares slot i, each
// qubit's virtual Zs stay in order around its own pulses.
inline void compile_layer(const std::vector<Native>& wa, const std::vector<Native>& wb, std::vector<PhysicalOp>& out) {
  struct Segment {
    std::vector<Native> z;
    int pulse = -1;
  };
  auto split = [](const std::vector<Native>& w) {
    std::vector<Segment> seg(1);
    for (Native g : w) {
      if (is_pulse(g)) {
        seg.back().pulse = static_cast<int>(g);
        seg.emplace_back();
      } else {
        seg.back().z.push_back(g);
      }
    }
    return seg;
  };
  const auto sa = split(wa), sb = split(wb);
  const std::size_t slots = std::max(sa.size(), sb.size()) - 1;
  for (std::size_t i = 0; i <= slots; ++i) {
    for (int q = 0; q < 2; ++q) {
      const auto& s = q == 0 ? sa : sb;
      if (i < s.size())
        for (Native g : s[i].z) out.push_back({PhysicalOp::Kind::VirtualZ, q, g, -1, -1});
    }
    if (i == slots) break;
    PhysicalOp slot;
    slot.kind = PhysicalOp::Kind::Slot;
    slot.pulse_a = i < sa.size() ? sa[i].pulse : -1;
    slot.pulse_b = i < sb.size() ? sb[i].pulse : -1;
    out.push_back(slot);
  }
}

inline std::vector<PhysicalOp> compile_element(const CliffordGroup& group, int element) {
  if (group.qubits() != 2) throw ConfigError("compile_element: two-qubit group expected");
  std::vector<PhysicalOp> out;
  for (const auto& st : group.steps(element)) {
    if (st.cz) out.push_back({PhysicalOp::Kind::CZ});
    else compile_layer(group.single().word(st.a), group.single().word(st.b), out);
  }
  return out;
}

// Ideal 4x4 unitary of compiled operations, for checking the compiler.
inline CMat ideal_unitary(const std::vector<PhysicalOp>& ops) {
  CMat U = CMat::Identity(4, 4);
  for (const auto& op : ops) {
    switch (op.kind) {
      case PhysicalOp::Kind::VirtualZ: U = embed(native_unitary_1q(op.gate), op.qubit) * U; break;
      case PhysicalOp::Kind::CZ: U = cz_unitary() * U; break;
      case PhysicalOp::Kind::Slot: {
        const CMat a = op.pulse_a < 0 ? CMat::Identity(2, 2) : native_unitary_1q(static_cast<Native>(op.pulse_a));
        const CMat b = op.pulse_b < 0 ? CMat::Identity(2, 2) : native_unitary_1q(static_cast<Native>(op.pulse_b));
        U = kron(a, b) * U;
        break;
      }
    }
  }
  return U;
}

}  // namespace fgge::rb
