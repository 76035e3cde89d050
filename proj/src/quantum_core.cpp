#include "qsdc/quantum_core.hpp"

namespace qsdc {

std::string_view to_string(Basis b) { return b == Basis::Z ? "Z" : "X"; }

std::string_view to_string(FlipOp op) { return op == FlipOp::Identity ? "I" : "U"; }

Basis random_basis(Rng& rng) {
  return std::uniform_int_distribution<int>{0, 1}(rng) == 0 ? Basis::Z : Basis::X;
}

PhotonState prepare_random(Rng& rng) {
  const int k = std::uniform_int_distribution<int>{0, 3}(rng);
  return PhotonState{k < 2 ? Basis::Z : Basis::X, static_cast<std::uint8_t>(k & 1), 1};
}

PhotonState apply(FlipOp op, PhotonState s) {
  if (op == FlipOp::Identity) return s;
  // In both bases the "0" eigenstate picks up the minus sign:
  // U|0> = -|1>, U|+> = |->, U|1> = |0>, U|-> = -|+>.
  const bool negate = (s.basis == Basis::Z) ? (s.bit == 0) : (s.bit == 1);
  s.bit ^= 1;
  if (negate) s.sign = static_cast<std::int8_t>(-s.sign);
  return s;
}

std::uint8_t measure(const PhotonState& s, Basis b, Rng& rng) {
  if (b == s.basis) return s.bit;
  return static_cast<std::uint8_t>(std::uniform_int_distribution<int>{0, 1}(rng));
}

}  // namespace qsdc
