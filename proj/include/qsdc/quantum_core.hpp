#pragma once

#include <cstdint>
#include <string_view>

#include "qsdc/random.hpp"

namespace qsdc {

enum class Basis : std::uint8_t { Z, X };

enum class FlipOp : std::uint8_t { Identity, Flip };

/// One of |0>, |1>, |+>, |->, with the global sign picked up from U = i*sigma_y.
/// The sign is unobservable; it is kept only so the flip algebra can be checked exactly.
struct PhotonState {
  Basis basis = Basis::Z;
  std::uint8_t bit = 0;  // 0 -> |0> or |+>, 1 -> |1> or |->
  std::int8_t sign = 1;

  friend bool operator==(const PhotonState&, const PhotonState&) = default;
};

std::string_view to_string(Basis b);
std::string_view to_string(FlipOp op);

Basis random_basis(Rng& rng);

/// Uniform over the four BB84 states, sign = +1.
PhotonState prepare_random(Rng& rng);

/// I leaves the state alone. U maps |0> -> -|1>, |1> -> |0>, |+> -> |->, |-> -> -|+>.
PhotonState apply(FlipOp op, PhotonState s);

/// Projective measurement. Same basis is deterministic; conjugate basis is a fair coin.
std::uint8_t measure(const PhotonState& s, Basis b, Rng& rng);

}  // namespace qsdc
