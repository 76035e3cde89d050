#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "qsdc/protocol_engine.hpp"

using namespace qsdc;

namespace {

BlockConfig operating_point(std::uint64_t seed = 1) {
  BlockConfig cfg;
  cfg.seed = seed;
  return cfg;
}

BlockConfig ideal(std::uint64_t seed = 1) {
  BlockConfig cfg = operating_point(seed);
  cfg.channel.e = 0.0;
  cfg.channel.alpha = 0.0;
  cfg.force_detection = true;
  cfg.n2 = 400;
  return cfg;
}

std::size_t index_of(const std::vector<std::string>& events, const std::string& name) {
  const auto it = std::find(events.begin(), events.end(), name);
  REQUIRE(it != events.end());
  return static_cast<std::size_t>(it - events.begin());
}

}  // namespace

TEST_CASE("attack names round-trip") {
  for (auto a : {Attack::None, Attack::InterceptResend, Attack::FlipBackward})
    CHECK(parse_attack(to_string(a)) == a);
  CHECK_FALSE(parse_attack("bogus").has_value());
}

TEST_CASE("block config validation") {
  BlockConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.channel.check_fraction = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = BlockConfig{};
  cfg.error_threshold = 0.004;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = BlockConfig{};
  cfg.n2 = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = BlockConfig{};
  cfg.tones = 17;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = BlockConfig{};
  cfg.n2 = 10002;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("forward_check compares same-basis samples only") {
  const std::vector<PhotonState> alice{{Basis::Z, 0, 1}, {Basis::X, 1, 1}, {Basis::Z, 1, 1}, {Basis::X, 0, 1}};
  const std::vector<ForwardSample> bob{{0, Basis::Z, 0}, {1, Basis::Z, 0}, {2, Basis::Z, 0}, {3, Basis::X, 0}};
  const auto r = forward_check(alice, bob, 0.4);
  CHECK(r.sampled == 3);
  CHECK(r.mismatches == 1);
  CHECK(r.qber == doctest::Approx(1.0 / 3.0));
  CHECK(r.status == CheckStatus::Pass);
  CHECK(forward_check(alice, bob, 0.3).status == CheckStatus::Fail);

  const std::vector<ForwardSample> only_wrong_basis{{0, Basis::X, 0}, {1, Basis::Z, 1}};
  const auto none = forward_check(alice, only_wrong_basis, 0.1);
  CHECK(none.status == CheckStatus::InsufficientSamples);
  CHECK_FALSE(none.pass());
  CHECK(forward_check(alice, {}, 0.1).status == CheckStatus::InsufficientSamples);
}

TEST_CASE("backward_check treats lost photons as erasures") {
  const std::vector<std::optional<std::uint8_t>> x{1, 0, std::nullopt, 1};
  const std::vector<BackwardSample> ops{{0, FlipOp::Flip}, {1, FlipOp::Identity}, {2, FlipOp::Flip}, {3, FlipOp::Identity}};
  const auto r = backward_check(ops, x, 0.4);
  CHECK(r.sampled == 3);
  CHECK(r.mismatches == 1);
  CHECK(r.status == CheckStatus::Pass);
  const std::vector<std::optional<std::uint8_t>> all_lost(4);
  CHECK(backward_check(ops, all_lost, 0.1).status == CheckStatus::InsufficientSamples);
}

TEST_CASE("check statistics with injected noise") {
  constexpr std::size_t kSamples = 100000;
  constexpr double e = 0.005;
  const double sigma = std::sqrt(e * (1 - e) / kSamples);
  Rng rng{77};

  SUBCASE("forward leg") {
    std::vector<PhotonState> alice(kSamples);
    std::vector<ForwardSample> bob(kSamples);
    for (std::size_t i = 0; i < kSamples; ++i) {
      alice[i] = prepare_random(rng);
      std::uint8_t out = measure(alice[i], alice[i].basis, rng);
      if (bernoulli(rng, e)) out ^= 1;
      bob[i] = {i, alice[i].basis, out};
    }
    const auto r = forward_check(alice, bob, 0.05);
    CHECK(r.sampled == kSamples);
    CHECK(std::abs(r.qber - e) < 3 * sigma);
  }
  SUBCASE("backward leg") {
    std::vector<BackwardSample> ops(kSamples);
    std::vector<std::optional<std::uint8_t>> x(kSamples);
    for (std::size_t i = 0; i < kSamples; ++i) {
      ops[i] = {i, bernoulli(rng, 0.5) ? FlipOp::Flip : FlipOp::Identity};
      std::uint8_t v = ops[i].op == FlipOp::Flip ? 1 : 0;
      if (bernoulli(rng, e)) v ^= 1;
      x[i] = v;
    }
    const auto r = backward_check(ops, x, 0.05);
    CHECK(std::abs(r.qber - e) < 3 * sigma);
  }
}

TEST_CASE("ideal channel delivers every codeword with zero QBER") {
  for (std::uint64_t v = 0; v < 16; ++v) {
    const auto bits = to_bits(v, 4);
    const auto t = run_block(ideal(100 + v), bits);
    CHECK(t.verdict == Verdict::Delivered);
    CHECK(t.decoded_bits == bits);
    CHECK(t.n1 == t.n2);
    CHECK(t.forward_check.result.qber == 0.0);
    CHECK(t.backward_check.result.qber == 0.0);
    CHECK(t.forward_check.result.sampled > 0);
    CHECK(t.backward_check.result.sampled > 0);
  }
}

TEST_CASE("operating point carries about 80 photons and 4 bits") {
  double stream_total = 0.0;
  int delivered = 0;
  constexpr int kBlocks = 50;
  for (int i = 0; i < kBlocks; ++i) {
    const auto bits = to_bits(static_cast<std::uint64_t>(i % 16), 4);
    const auto t = run_block(operating_point(1000 + static_cast<std::uint64_t>(i)), bits);
    stream_total += static_cast<double>(t.stream.records.size());
    if (t.verdict == Verdict::Delivered && t.decoded_bits == bits) ++delivered;
  }
  CHECK(stream_total / kBlocks == doctest::Approx(80.0).epsilon(0.1));
  CHECK(delivered >= kBlocks - 1);
}

TEST_CASE("check partition, stream bound and event ordering") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    auto cfg = operating_point(seed);
    cfg.channel.check_fraction = seed % 2 == 0 ? 0.5 : 0.3;
    cfg.channel.l1_km = static_cast<double>(seed % 5);
    cfg.channel.l2_km = static_cast<double>(seed % 3);
    const auto t = run_block(cfg, to_bits(seed % 16, 4));
    const double C = cfg.channel.check_fraction;
    CHECK(t.n1 <= t.n2);

    const auto& f = t.forward_check.positions;
    const auto& b = t.backward_check.positions;
    const auto& e = t.encoding_positions;
    std::set<std::uint64_t> all(f.begin(), f.end());
    all.insert(b.begin(), b.end());
    all.insert(e.begin(), e.end());
    CHECK(all.size() == f.size() + b.size() + e.size());
    CHECK(all.size() == t.n1);
    CHECK(f.size() == static_cast<std::size_t>(std::ceil(C * static_cast<double>(t.n1) - 1e-9)));

    CHECK(static_cast<double>(t.n_encoded) <= (1 - C) * (1 - C) * static_cast<double>(t.n1) + 1e-9);
    CHECK(t.stream.records.size() <= t.n_encoded);
    CHECK_NOTHROW(t.stream.validate());

    CHECK(index_of(t.events, "forward_check") < index_of(t.events, "encode"));
    CHECK(index_of(t.events, "encode") < index_of(t.events, "backward_transmit"));
    CHECK(t.events.front() == "prepare");
  }
}

TEST_CASE("aborted forward check stops before encoding") {
  auto cfg = operating_point(9);
  cfg.attack = Attack::InterceptResend;
  const auto t = run_block(cfg, {0, 1, 0, 1});
  CHECK(t.verdict == Verdict::AbortedForward);
  CHECK(std::find(t.events.begin(), t.events.end(), "encode") == t.events.end());
  CHECK(t.encoding_positions.empty());
  CHECK(t.stream.records.empty());
}

TEST_CASE("intercept-resend raises the forward QBER to one quarter") {
  auto cfg = operating_point();
  cfg.attack = Attack::InterceptResend;
  cfg.error_threshold = 0.1;
  cfg.channel.e = 0.0;
  std::size_t sampled = 0;
  std::size_t mismatches = 0;
  for (std::uint64_t s = 0; sampled < 20000; ++s) {
    cfg.seed = 5000 + s;
    const auto t = run_block(cfg, {1, 1, 0, 0});
    CHECK(t.verdict == Verdict::AbortedForward);
    sampled += t.forward_check.result.sampled;
    mismatches += t.forward_check.result.mismatches;
  }
  const double q = static_cast<double>(mismatches) / static_cast<double>(sampled);
  CHECK(std::abs(q - 0.25) < 0.01);
}

TEST_CASE("flipping every backward photon is caught") {
  auto cfg = operating_point(3);
  cfg.attack = Attack::FlipBackward;
  const auto t = run_block(cfg, {0, 0, 1, 1});
  CHECK(t.verdict == Verdict::AbortedBackward);
  CHECK(t.backward_check.result.qber > 0.95);
}

TEST_CASE("opaque fiber yields insufficient samples and an abort") {
  auto cfg = operating_point(4);
  cfg.channel.alpha = 1000.0;
  cfg.channel.l1_km = 10.0;
  const auto t = run_block(cfg, {0, 0, 0, 0});
  CHECK(t.n1 == 0);
  CHECK(t.forward_check.result.status == CheckStatus::InsufficientSamples);
  CHECK(t.verdict == Verdict::AbortedForward);
}

TEST_CASE("honest channel rarely aborts") {
  // 10^4 blocks at e = 0.5 % and threshold 5 %.
  auto cfg = operating_point();
  constexpr int kBlocks = 10000;
  int aborted = 0;
  for (int i = 0; i < kBlocks; ++i) {
    cfg.seed = derive_seed(42, static_cast<std::uint64_t>(i));
    const auto t = run_block(cfg, to_bits(static_cast<std::uint64_t>(i % 16), 4));
    aborted += t.verdict == Verdict::AbortedForward || t.verdict == Verdict::AbortedBackward;
  }
  MESSAGE("honest aborts: ", aborted, " of ", kBlocks);
  CHECK(aborted < kBlocks / 1000);
}

TEST_CASE("blocks are deterministic under a seed") {
  const auto a = run_block(operating_point(11), {1, 0, 0, 1});
  const auto b = run_block(operating_point(11), {1, 0, 0, 1});
  CHECK(a.forward_check.positions == b.forward_check.positions);
  CHECK(a.encoding_positions == b.encoding_positions);
  CHECK(a.stream.records.size() == b.stream.records.size());
  for (std::size_t i = 0; i < a.stream.records.size(); ++i) {
    CHECK(a.stream.records[i].x == b.stream.records[i].x);
    CHECK(a.stream.records[i].tau == b.stream.records[i].tau);
  }
  const auto c = run_block(operating_point(12), {1, 0, 0, 1});
  CHECK(c.forward_check.positions != a.forward_check.positions);
}

TEST_CASE("run_block_with_tones") {
  const auto t = run_block_with_tones(ideal(), {150e3});
  CHECK(t.verdict == Verdict::Delivered);
  CHECK(t.decoded_tones == std::vector<double>{150e3});
  CHECK_THROWS_AS(run_block_with_tones(ideal(), {151e3}), std::invalid_argument);
  CHECK_THROWS_AS(run_block_with_tones(ideal(), {}), std::invalid_argument);
}

TEST_CASE("sessions") {
  SUBCASE("1 KB over the ideal channel") {
    std::vector<std::uint8_t> msg(1024);
    for (std::size_t i = 0; i < msg.size(); ++i) msg[i] = static_cast<std::uint8_t>(i * 37 + 5);
    const auto rep = run_session(ideal(), msg, 8, false);
    CHECK(rep.status == SessionStatus::Delivered);
    CHECK(rep.blocks_sent == 2048);
    CHECK(rep.blocks_delivered == 2048);
    CHECK(rep.retransmissions == 0);
    CHECK(rep.throughput_bps == doctest::Approx(4000.0).epsilon(1e-12));
    CHECK(rep.received == msg);
  }
  SUBCASE("empty message") {
    const auto rep = run_session(operating_point(), {});
    CHECK(rep.status == SessionStatus::Delivered);
    CHECK(rep.blocks_sent == 0);
    CHECK(rep.received.empty());
  }
  SUBCASE("odd-length payload is padded") {
    auto cfg = ideal();
    cfg.grid = FrequencyGrid{25e3, 200e3, 25e3};  // 8 channels, 3 bits
    const std::vector<std::uint8_t> msg{0xA5, 0x3C};
    const auto rep = run_session(cfg, msg);
    CHECK(rep.bits_per_block == 3);
    CHECK(rep.blocks_sent == 6);
    CHECK(rep.received == msg);
  }
  SUBCASE("abort propagates with the block index") {
    auto cfg = operating_point();
    cfg.attack = Attack::InterceptResend;
    const std::vector<std::uint8_t> msg{0x42};
    const auto rep = run_session(cfg, msg);
    CHECK(rep.status == SessionStatus::Aborted);
    CHECK(rep.failed_block == std::size_t{0});
  }
  SUBCASE("replay") {
    const std::vector<std::uint8_t> msg{'h', 'i'};
    const auto a = run_session(operating_point(5), msg);
    const auto b = run_session(operating_point(5), msg);
    CHECK(a.received == b.received);
    CHECK(a.blocks_sent == b.blocks_sent);
    REQUIRE(a.blocks.size() == b.blocks.size());
    for (std::size_t i = 0; i < a.blocks.size(); ++i)
      CHECK(a.blocks[i].encoding_positions == b.blocks[i].encoding_positions);
  }
  SUBCASE("zero-bit codebook is rejected") {
    auto cfg = ideal();
    cfg.tones = 16;
    const std::vector<std::uint8_t> msg{1};
    CHECK_THROWS_AS(run_session(cfg, msg), std::invalid_argument);
  }
}
