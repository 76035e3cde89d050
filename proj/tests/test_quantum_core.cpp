#include <array>
#include <cmath>
#include <complex>

#include "doctest.h"
#include "qsdc/quantum_core.hpp"

using namespace qsdc;

namespace {

// Amplitude-vector oracle, independent of the symbolic representation.
using Vec = std::array<std::complex<double>, 2>;

Vec amplitudes(const PhotonState& s) {
  const double r = 1.0 / std::sqrt(2.0);
  Vec v;
  if (s.basis == Basis::Z) {
    v = s.bit == 0 ? Vec{1.0, 0.0} : Vec{0.0, 1.0};
  } else {
    v = s.bit == 0 ? Vec{r, r} : Vec{r, -r};
  }
  for (auto& a : v) a *= static_cast<double>(s.sign);
  return v;
}

// U = i sigma_y = |0><1| - |1><0|
Vec apply_matrix(const Vec& v) { return {v[1], -v[0]}; }

double prob_outcome(const Vec& v, Basis b, int outcome) {
  const double r = 1.0 / std::sqrt(2.0);
  Vec e;
  if (b == Basis::Z) {
    e = outcome == 0 ? Vec{1.0, 0.0} : Vec{0.0, 1.0};
  } else {
    e = outcome == 0 ? Vec{r, r} : Vec{r, -r};
  }
  return std::norm(std::conj(e[0]) * v[0] + std::conj(e[1]) * v[1]);
}

std::array<PhotonState, 8> all_states() {
  std::array<PhotonState, 8> out{};
  int i = 0;
  for (auto b : {Basis::Z, Basis::X})
    for (std::uint8_t bit : {0, 1})
      for (std::int8_t sign : {1, -1}) out[i++] = PhotonState{b, bit, sign};
  return out;
}

bool close(const Vec& a, const Vec& b) { return std::abs(a[0] - b[0]) < 1e-12 && std::abs(a[1] - b[1]) < 1e-12; }

}  // namespace

TEST_CASE("flip matches the i*sigma_y matrix on every state") {
  for (const auto& s : all_states()) {
    CHECK(close(amplitudes(apply(FlipOp::Flip, s)), apply_matrix(amplitudes(s))));
    CHECK(apply(FlipOp::Identity, s) == s);
  }
}

TEST_CASE("flip table") {
  CHECK(apply(FlipOp::Flip, PhotonState{Basis::Z, 0, 1}) == PhotonState{Basis::Z, 1, -1});
  CHECK(apply(FlipOp::Flip, PhotonState{Basis::Z, 1, 1}) == PhotonState{Basis::Z, 0, 1});
  CHECK(apply(FlipOp::Flip, PhotonState{Basis::X, 0, 1}) == PhotonState{Basis::X, 1, 1});
  CHECK(apply(FlipOp::Flip, PhotonState{Basis::X, 1, 1}) == PhotonState{Basis::X, 0, -1});
  CHECK(apply(FlipOp::Identity, PhotonState{Basis::X, 1, 1}) == PhotonState{Basis::X, 1, 1});
}

TEST_CASE("flip twice is minus identity") {
  const PhotonState plus{Basis::X, 0, 1};
  const auto twice = apply(FlipOp::Flip, apply(FlipOp::Flip, plus));
  CHECK(twice == PhotonState{Basis::X, 0, -1});
  for (auto b : {Basis::Z, Basis::X})
    for (int o : {0, 1}) CHECK(prob_outcome(amplitudes(twice), b, o) == doctest::Approx(prob_outcome(amplitudes(plus), b, o)));
  for (const auto& s : all_states()) {
    const auto v = amplitudes(apply(FlipOp::Flip, apply(FlipOp::Flip, s)));
    const auto w = amplitudes(s);
    CHECK(close(v, Vec{-w[0], -w[1]}));
  }
}

TEST_CASE("flip preserves basis and toggles the same-basis outcome") {
  Rng rng{7};
  for (const auto& s : all_states()) {
    const auto f = apply(FlipOp::Flip, s);
    CHECK(f.basis == s.basis);
    CHECK(measure(f, s.basis, rng) == 1 - measure(s, s.basis, rng));
  }
}

TEST_CASE("measurement statistics follow the Born rule and ignore the sign") {
  constexpr int kTrials = 40000;
  for (const auto& s : all_states()) {
    for (auto b : {Basis::Z, Basis::X}) {
      const double p1 = prob_outcome(amplitudes(s), b, 1);
      Rng rng{static_cast<std::uint64_t>(1000 + s.bit * 10 + (s.basis == Basis::X) * 100 + (b == Basis::X))};
      int ones = 0;
      for (int i = 0; i < kTrials; ++i) ones += measure(s, b, rng);
      CHECK(static_cast<double>(ones) / kTrials == doctest::Approx(p1).epsilon(0.015));
    }
  }
}

TEST_CASE("same basis is deterministic, conjugate basis is a fair coin") {
  Rng rng{11};
  for (int i = 0; i < 100; ++i) CHECK(measure(PhotonState{Basis::Z, 1, 1}, Basis::Z, rng) == 1);
  CHECK(measure(apply(FlipOp::Flip, PhotonState{Basis::X, 0, 1}), Basis::X, rng) == 1);

  int ones = 0;
  constexpr int kTrials = 100000;
  for (int i = 0; i < kTrials; ++i) ones += measure(PhotonState{Basis::Z, 0, 1}, Basis::X, rng);
  CHECK(std::abs(static_cast<double>(ones) / kTrials - 0.5) < 0.01);
}

TEST_CASE("prepare_random is uniform and replayable") {
  Rng a{42};
  Rng b{42};
  for (int i = 0; i < 64; ++i) CHECK(prepare_random(a) == prepare_random(b));

  Rng rng{5};
  std::array<int, 4> counts{};
  constexpr int kDraws = 100000;
  bool unsigned_states = true;
  for (int i = 0; i < kDraws; ++i) {
    const auto s = prepare_random(rng);
    unsigned_states &= s.sign == 1;
    ++counts[(s.basis == Basis::X ? 2 : 0) + s.bit];
  }
  CHECK(unsigned_states);
  for (int c : counts) CHECK(std::abs(static_cast<double>(c) / kDraws - 0.25) < 0.01);

  Rng c = make_rng(1);
  Rng d = make_rng(2);
  bool differ = false;
  for (int i = 0; i < 64; ++i) differ |= !(prepare_random(c) == prepare_random(d));
  CHECK(differ);
}
