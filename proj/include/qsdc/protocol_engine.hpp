#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qsdc/frequency_codec.hpp"
#include "qsdc/photonic_channel.hpp"
#include "qsdc/quantum_core.hpp"

namespace qsdc {

/// Eavesdropper models used to exercise the two checks.
enum class Attack : std::uint8_t {
  None,
  InterceptResend,  // measure every forward pulse in a random basis and resend the result
  FlipBackward,     // apply U to every photon on the way back to Alice
};

std::string_view to_string(Attack a);
std::optional<Attack> parse_attack(std::string_view s);

struct BlockConfig {
  std::size_t n2 = 10000;         // pulses prepared by Alice, one per slot of 1/f_rep
  double error_threshold = 0.05;  // abort when a check QBER exceeds this
  FrequencyGrid grid;
  std::size_t tones = 1;          // r
  double t_span = 1e-3;
  double snr_threshold = 1.0;
  unsigned oversample = 1;
  ChannelParams channel;          // also carries the check fraction C
  std::uint64_t seed = 1;
  bool force_detection = false;   // one photon per pulse, no loss: the ideal-channel surrogate
  Attack attack = Attack::None;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

enum class CheckStatus : std::uint8_t { Pass, Fail, InsufficientSamples };

struct CheckResult {
  std::size_t sampled = 0;     // comparisons that entered the QBER
  std::size_t mismatches = 0;
  double qber = 0.0;           // mismatches / sampled, 0 when nothing was sampled
  CheckStatus status = CheckStatus::InsufficientSamples;

  bool pass() const { return status == CheckStatus::Pass; }
};

struct ForwardSample {
  std::uint64_t slot = 0;
  Basis basis = Basis::Z;
  std::uint8_t outcome = 0;
};

struct BackwardSample {
  std::uint64_t slot = 0;
  FlipOp op = FlipOp::Identity;
};

/// Bob's check measurements against Alice's prepared states (indexed by slot).
/// Only same-basis samples are compared.
CheckResult forward_check(std::span<const PhotonState> alice_states,
                          std::span<const ForwardSample> bob_samples, double error_threshold);

/// Bob's disclosed check operations against Alice's x per slot (nullopt: never detected).
/// Undetected check photons are erasures and do not count.
CheckResult backward_check(std::span<const BackwardSample> bob_ops,
                           std::span<const std::optional<std::uint8_t>> alice_x_by_slot,
                           double error_threshold);

enum class Verdict : std::uint8_t { Delivered, AbortedForward, AbortedBackward, DecodeFailed };

std::string_view to_string(Verdict v);
std::string_view to_string(CheckStatus s);

struct ForwardCheckLog {
  std::vector<std::uint64_t> positions;
  std::vector<Basis> bases;
  std::vector<std::uint8_t> outcomes;
  CheckResult result;
};

struct BackwardCheckLog {
  std::vector<std::uint64_t> positions;
  std::vector<FlipOp> ops;
  std::vector<std::optional<std::uint8_t>> outcomes;  // Alice's x; nullopt when lost
  CheckResult result;
};

struct BlockTranscript {
  std::size_t n2 = 0;
  std::size_t n1 = 0;            // pulses reaching Bob
  std::size_t n_encoded = 0;     // photons Bob modulated, before backward loss
  std::size_t alice_clicks = 0;  // detector clicks at Alice, checks included
  std::uint64_t alice_photons = 0;
  std::vector<std::uint64_t> encoding_positions;
  ForwardCheckLog forward_check;
  BackwardCheckLog backward_check;
  SymbolStream stream;
  std::vector<double> decoded_tones;
  std::vector<double> tone_snr;
  double noise_floor = 0.0;
  BitString decoded_bits;
  Verdict verdict = Verdict::DecodeFailed;
  std::vector<std::string> events;  // protocol steps in execution order
};

/// Encodes message_bits with the block's codebook and runs the four protocol steps.
BlockTranscript run_block(const BlockConfig& cfg, const BitString& message_bits);

/// Same, modulating an explicit tone set (used for spectrum sweeps over every grid channel).
BlockTranscript run_block_with_tones(const BlockConfig& cfg, const std::vector<double>& tones);

enum class SessionStatus : std::uint8_t { Delivered, Aborted, DecodeFailed };

std::string_view to_string(SessionStatus s);

struct SessionReport {
  SessionStatus status = SessionStatus::Delivered;
  std::size_t message_bits = 0;
  unsigned bits_per_block = 0;
  std::size_t blocks_sent = 0;       // every attempt, retransmissions included
  std::size_t blocks_delivered = 0;
  std::size_t retransmissions = 0;
  std::optional<std::size_t> failed_block;
  double throughput_bps = 0.0;       // b * delivered / (sent * t_span)
  std::size_t bit_errors = 0;        // delivered blocks that decoded to the wrong codeword
  std::vector<std::uint8_t> received;
  std::vector<BlockTranscript> blocks;
};

/// Chains b-bit blocks (last one zero-padded) until the message is through. Each attempt gets
/// its own seed derived from cfg.seed; DecodeFailed blocks are retried up to max_retries times.
SessionReport run_session(const BlockConfig& cfg, std::span<const std::uint8_t> message,
                          std::size_t max_retries = 8, bool keep_transcripts = true);

}  // namespace qsdc
