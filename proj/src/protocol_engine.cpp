#include "qsdc/protocol_engine.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <stdexcept>

namespace qsdc {

std::string_view to_string(Attack a) {
  switch (a) {
    case Attack::None:
      return "none";
    case Attack::InterceptResend:
      return "intercept_resend";
    case Attack::FlipBackward:
      return "flip_backward";
  }
  return "none";
}

std::optional<Attack> parse_attack(std::string_view s) {
  for (auto a : {Attack::None, Attack::InterceptResend, Attack::FlipBackward})
    if (to_string(a) == s) return a;
  return std::nullopt;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Delivered:
      return "Delivered";
    case Verdict::AbortedForward:
      return "AbortedForward";
    case Verdict::AbortedBackward:
      return "AbortedBackward";
    case Verdict::DecodeFailed:
      return "DecodeFailed";
  }
  return "DecodeFailed";
}

std::string_view to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass:
      return "pass";
    case CheckStatus::Fail:
      return "fail";
    case CheckStatus::InsufficientSamples:
      return "insufficient_samples";
  }
  return "insufficient_samples";
}

std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::Delivered:
      return "Delivered";
    case SessionStatus::Aborted:
      return "Aborted";
    case SessionStatus::DecodeFailed:
      return "DecodeFailed";
  }
  return "DecodeFailed";
}

void BlockConfig::validate() const {
  channel.validate();
  grid.validate();
  if (n2 < 1) throw std::invalid_argument("n2: block size must be >= 1");
  if (!(t_span > 0.0)) throw std::invalid_argument("t_span: must be > 0");
  if (static_cast<double>(n2 - 1) / channel.f_rep > t_span * (1.0 + 1e-12))
    throw std::invalid_argument("n2: pulses spaced 1/f_rep do not fit inside t_span");
  if (!(error_threshold > 0.0 && error_threshold < 1.0))
    throw std::invalid_argument("error_threshold: must lie in (0, 1)");
  if (!(error_threshold > channel.e))
    throw std::invalid_argument("error_threshold: must exceed the channel error rate e");
  if (tones < 1 || tones > channel_count(grid))
    throw std::invalid_argument("tones: need 1 <= r <= N_c");
  if (snr_threshold < 1.0) throw std::invalid_argument("snr_threshold: must be >= 1");
  if (oversample < 1) throw std::invalid_argument("oversample: must be >= 1");
}

namespace {

CheckResult finish_check(std::size_t sampled, std::size_t mismatches, double threshold) {
  CheckResult r;
  r.sampled = sampled;
  r.mismatches = mismatches;
  if (sampled == 0) return r;
  r.qber = static_cast<double>(mismatches) / static_cast<double>(sampled);
  r.status = r.qber <= threshold ? CheckStatus::Pass : CheckStatus::Fail;
  return r;
}

}  // namespace

CheckResult forward_check(std::span<const PhotonState> alice_states,
                          std::span<const ForwardSample> bob_samples, double error_threshold) {
  std::size_t sampled = 0;
  std::size_t mismatches = 0;
  for (const auto& s : bob_samples) {
    if (s.slot >= alice_states.size()) throw std::out_of_range("forward_check: slot out of range");
    const auto& prepared = alice_states[s.slot];
    if (prepared.basis != s.basis) continue;
    ++sampled;
    if (prepared.bit != s.outcome) ++mismatches;
  }
  return finish_check(sampled, mismatches, error_threshold);
}

CheckResult backward_check(std::span<const BackwardSample> bob_ops,
                           std::span<const std::optional<std::uint8_t>> alice_x_by_slot,
                           double error_threshold) {
  std::size_t sampled = 0;
  std::size_t mismatches = 0;
  for (const auto& s : bob_ops) {
    if (s.slot >= alice_x_by_slot.size()) throw std::out_of_range("backward_check: slot out of range");
    const auto& x = alice_x_by_slot[s.slot];
    if (!x) continue;
    ++sampled;
    const std::uint8_t expected = s.op == FlipOp::Flip ? 1 : 0;
    if (*x != expected) ++mismatches;
  }
  return finish_check(sampled, mismatches, error_threshold);
}

namespace {

// Sub-stream identifiers for the parties in one block.
enum Stream : std::uint64_t { kAlice = 1, kBob = 2, kChannel = 3, kEve = 4 };

struct InFlight {
  PhotonState state;
  std::uint32_t photons = 0;
};

template <class T>
std::vector<T> sample_subset(const std::vector<T>& from, std::size_t count, Rng& rng) {
  std::vector<T> out;
  out.reserve(count);
  std::sample(from.begin(), from.end(), std::back_inserter(out), count, rng);
  return out;
}

template <class T>
std::vector<T> minus(const std::vector<T>& all, const std::vector<T>& removed) {
  std::vector<T> out;
  out.reserve(all.size() - removed.size());
  std::set_difference(all.begin(), all.end(), removed.begin(), removed.end(), std::back_inserter(out));
  return out;
}

std::size_t ceil_count(double x) {
  // Guard against 0.5*4 landing at 2.0000000000000004.
  return static_cast<std::size_t>(std::ceil(x - 1e-9));
}

BlockTranscript execute_block(const BlockConfig& cfg, const std::vector<double>& tones,
                              const Codebook* book) {
  cfg.validate();
  const auto& ch = cfg.channel;
  const double C = ch.check_fraction;

  Rng alice = make_rng(cfg.seed, kAlice);
  Rng bob = make_rng(cfg.seed, kBob);
  Rng channel = make_rng(cfg.seed, kChannel);
  Rng eve = make_rng(cfg.seed, kEve);

  BlockTranscript t;
  t.n2 = cfg.n2;
  t.stream.t_span = cfg.t_span;

  // Step 1: Alice prepares one random BB84 state per slot.
  std::vector<PhotonState> prepared(cfg.n2);
  std::vector<double> slot_time(cfg.n2);
  for (std::size_t k = 0; k < cfg.n2; ++k) {
    prepared[k] = prepare_random(alice);
    slot_time[k] = static_cast<double>(k) / ch.f_rep;
  }
  t.events.emplace_back("prepare");

  // Forward leg.
  const double eta_forward = fiber_transmittance(ch.alpha, leg_length_km(ch, Leg::Forward));
  std::vector<InFlight> flight(cfg.n2);
  std::vector<std::uint64_t> received;
  for (std::size_t k = 0; k < cfg.n2; ++k) {
    auto& f = flight[k];
    f.state = prepared[k];
    const std::uint32_t emitted = cfg.force_detection ? 1 : sample_photon_number(ch.mu, channel);
    if (emitted > 0 && cfg.attack == Attack::InterceptResend) {
      const Basis b = random_basis(eve);
      f.state = PhotonState{b, measure(f.state, b, eve), 1};
    }
    f.photons = cfg.force_detection ? emitted : attenuate(emitted, eta_forward, channel);
    if (f.photons > 0) received.push_back(k);
  }
  t.n1 = received.size();
  t.events.emplace_back("forward_transmit");

  // Step 2: Bob measures a random C-fraction of what arrived in random bases.
  const std::size_t n_fwd_check = std::min(received.size(), ceil_count(C * static_cast<double>(t.n1)));
  auto fwd_positions = sample_subset(received, n_fwd_check, bob);
  std::vector<ForwardSample> fwd_samples;
  fwd_samples.reserve(fwd_positions.size());
  for (auto slot : fwd_positions) {
    const Basis b = random_basis(bob);
    std::uint8_t outcome = measure(flight[slot].state, b, bob);
    if (bernoulli(channel, ch.e)) outcome ^= 1;
    fwd_samples.push_back({slot, b, outcome});
    t.forward_check.positions.push_back(slot);
    t.forward_check.bases.push_back(b);
    t.forward_check.outcomes.push_back(outcome);
    flight[slot].photons = 0;  // consumed by the measurement
  }
  t.forward_check.result = forward_check(prepared, fwd_samples, cfg.error_threshold);
  t.events.emplace_back("forward_check");
  if (!t.forward_check.result.pass()) {
    t.verdict = Verdict::AbortedForward;
    return t;
  }

  // Step 3: backward check photons, then the frequency-coded flips on the rest.
  const auto remaining = minus(received, fwd_positions);
  const std::size_t n_bwd_check =
      std::min(remaining.size(), ceil_count(C * (1.0 - C) * static_cast<double>(t.n1)));
  auto bwd_positions = sample_subset(remaining, n_bwd_check, bob);
  t.encoding_positions = minus(remaining, bwd_positions);
  t.n_encoded = t.encoding_positions.size();

  std::vector<BackwardSample> bwd_ops;
  bwd_ops.reserve(bwd_positions.size());
  for (auto slot : bwd_positions) {
    const FlipOp op = bernoulli(bob, 0.5) ? FlipOp::Flip : FlipOp::Identity;
    bwd_ops.push_back({slot, op});
    flight[slot].state = apply(op, flight[slot].state);
  }

  const auto plan = make_modulation_plan(tones, cfg.t_span, bob);
  std::vector<double> encode_times;
  encode_times.reserve(t.encoding_positions.size());
  for (auto slot : t.encoding_positions) encode_times.push_back(slot_time[slot]);
  const auto ops = flip_schedule(plan, encode_times);
  for (std::size_t i = 0; i < ops.size(); ++i) {
    auto& f = flight[t.encoding_positions[i]];
    f.state = apply(ops[i], f.state);
  }
  t.events.emplace_back("encode");

  // Step 4: return trip and Alice's measurement in her own basis.
  const double eta_backward =
      fiber_transmittance(ch.alpha, leg_length_km(ch, Leg::Backward)) * ch.eta_det;
  std::vector<std::optional<std::uint8_t>> alice_x(cfg.n2);
  for (auto slot : remaining) {
    auto& f = flight[slot];
    if (cfg.attack == Attack::FlipBackward) f.state = apply(FlipOp::Flip, f.state);
    const std::uint32_t arrived = cfg.force_detection ? f.photons : attenuate(f.photons, eta_backward, channel);
    if (arrived == 0) continue;
    t.alice_photons += arrived;
    ++t.alice_clicks;
    std::uint8_t outcome = measure(f.state, prepared[slot].basis, alice);
    if (bernoulli(channel, ch.e)) outcome ^= 1;
    alice_x[slot] = static_cast<std::uint8_t>(outcome ^ prepared[slot].bit);
  }
  t.events.emplace_back("backward_transmit");

  for (const auto& s : bwd_ops) {
    t.backward_check.positions.push_back(s.slot);
    t.backward_check.ops.push_back(s.op);
    t.backward_check.outcomes.push_back(alice_x[s.slot]);
  }
  t.backward_check.result = backward_check(bwd_ops, alice_x, cfg.error_threshold);
  t.events.emplace_back("backward_check");
  if (!t.backward_check.result.pass()) {
    t.verdict = Verdict::AbortedBackward;
    return t;
  }

  for (auto slot : t.encoding_positions)
    if (alice_x[slot]) t.stream.records.push_back({*alice_x[slot], slot_time[slot]});

  const auto spectrum = dtft(t.stream, cfg.grid, cfg.oversample);
  const auto detection = detect_tones(spectrum, cfg.tones, cfg.snr_threshold);
  t.events.emplace_back("decode");
  if (const auto* amb = std::get_if<AmbiguousDetection>(&detection)) {
    t.noise_floor = amb->noise_floor;
    t.verdict = Verdict::DecodeFailed;
    return t;
  }
  const auto& found = std::get<DetectedTones>(detection);
  t.decoded_tones = found.frequencies;
  t.tone_snr = found.snr;
  t.noise_floor = found.noise_floor;

  if (book == nullptr) {
    t.verdict = Verdict::DecodeFailed;
    return t;
  }
  const auto bits = book->decode(found.frequencies);
  if (std::holds_alternative<UnmappedCodeword>(bits)) {
    t.verdict = Verdict::DecodeFailed;
    return t;
  }
  t.decoded_bits = std::get<BitString>(bits);
  t.verdict = Verdict::Delivered;
  return t;
}

}  // namespace

BlockTranscript run_block(const BlockConfig& cfg, const BitString& message_bits) {
  cfg.validate();
  const Codebook book(cfg.grid, cfg.tones);
  return execute_block(cfg, book.encode(message_bits), &book);
}

BlockTranscript run_block_with_tones(const BlockConfig& cfg, const std::vector<double>& tones) {
  cfg.validate();
  if (tones.empty()) throw std::invalid_argument("run_block_with_tones: no tones");
  for (double f : tones)
    if (!cfg.grid.channel_of(f)) throw std::invalid_argument("run_block_with_tones: off-grid tone");
  std::optional<Codebook> book;
  if (tones.size() == cfg.tones) book.emplace(cfg.grid, cfg.tones);
  auto run_cfg = cfg;
  run_cfg.tones = tones.size();
  return execute_block(run_cfg, tones, book ? &*book : nullptr);
}

SessionReport run_session(const BlockConfig& cfg, std::span<const std::uint8_t> message,
                          std::size_t max_retries, bool keep_transcripts) {
  cfg.validate();
  const Codebook book(cfg.grid, cfg.tones);
  const unsigned b = book.bits();
  if (b == 0) throw std::invalid_argument("session: the codebook carries 0 bits per block");

  SessionReport rep;
  rep.bits_per_block = b;
  rep.message_bits = message.size() * 8;

  BitString payload;
  payload.reserve(rep.message_bits);
  for (auto byte : message)
    for (int i = 7; i >= 0; --i) payload.push_back(static_cast<std::uint8_t>((byte >> i) & 1U));
  const std::size_t n_blocks = (payload.size() + b - 1) / b;
  payload.resize(n_blocks * b, 0);

  BitString received_bits;
  received_bits.reserve(payload.size());
  for (std::size_t block = 0; block < n_blocks; ++block) {
    const BitString chunk(payload.begin() + static_cast<std::ptrdiff_t>(block * b),
                          payload.begin() + static_cast<std::ptrdiff_t>((block + 1) * b));
    bool done = false;
    for (std::size_t attempt = 0; attempt <= max_retries && !done; ++attempt) {
      auto block_cfg = cfg;
      block_cfg.seed = derive_seed(cfg.seed, block, attempt);
      auto tr = run_block(block_cfg, chunk);
      ++rep.blocks_sent;
      if (attempt > 0) ++rep.retransmissions;
      const Verdict v = tr.verdict;
      if (v == Verdict::Delivered) {
        ++rep.blocks_delivered;
        if (tr.decoded_bits != chunk) ++rep.bit_errors;
        received_bits.insert(received_bits.end(), tr.decoded_bits.begin(), tr.decoded_bits.end());
        done = true;
      }
      if (keep_transcripts) rep.blocks.push_back(std::move(tr));
      if (v == Verdict::AbortedForward || v == Verdict::AbortedBackward) {
        rep.status = SessionStatus::Aborted;
        rep.failed_block = block;
        break;
      }
    }
    if (rep.failed_block) break;
    if (!done) {
      rep.status = SessionStatus::DecodeFailed;
      rep.failed_block = block;
      break;
    }
  }

  if (rep.blocks_sent > 0)
    rep.throughput_bps = static_cast<double>(b) * static_cast<double>(rep.blocks_delivered) /
                         (static_cast<double>(rep.blocks_sent) * cfg.t_span);
  received_bits.resize(std::min(received_bits.size(), rep.message_bits));
  for (std::size_t i = 0; i + 8 <= received_bits.size(); i += 8) {
    std::uint8_t byte = 0;
    for (std::size_t j = 0; j < 8; ++j) byte = static_cast<std::uint8_t>((byte << 1) | received_bits[i + j]);
    rep.received.push_back(byte);
  }
  return rep;
}

}  // namespace qsdc
