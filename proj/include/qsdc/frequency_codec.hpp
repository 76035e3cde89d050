#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <ostream>
#include <variant>
#include <vector>

#include "qsdc/quantum_core.hpp"
#include "qsdc/random.hpp"

namespace qsdc {

using BitString = std::vector<std::uint8_t>;  // one 0/1 per element, MSB first

/// Evenly spaced modulation channels f_min, f_min + f_b, ..., f_max (Hz).
struct FrequencyGrid {
  double f_min = 25e3;
  double f_max = 400e3;
  double f_b = 25e3;

  /// Channels f_min + k f_b for k = 0 .. floor(bandwidth / f_b).
  static FrequencyGrid from_bandwidth(double f_min, double bandwidth, double f_b);

  /// Throws std::invalid_argument unless f_min > 0, f_max >= f_min, f_b > 0 and the span is an
  /// integer number of spacings (1e-9 relative).
  void validate() const;

  double frequency(std::size_t channel) const { return f_min + f_b * static_cast<double>(channel); }

  /// Channel index of an on-grid frequency, nullopt otherwise.
  std::optional<std::size_t> channel_of(double f) const;
};

/// N_c = (f_max - f_min)/f_b + 1. Rejects a non-integral span.
std::size_t channel_count(const FrequencyGrid& grid);

struct Capacity {
  std::optional<std::uint64_t> n_max;  // empty when binomial(N_c, r) overflows 64 bits
  double log2_n_max = 0.0;             // exact real log2, for the rate
  unsigned bits = 0;                   // floor(log2 N_max), for the codebook
};

/// binomial(N_c, r) and its information content. Throws when r == 0 or r > N_c.
Capacity combinatorial_capacity(std::size_t n_c, std::size_t r);

/// log2(N_max) / t_span in bit/s.
double transmission_rate(std::uint64_t n_max, double t_span);
double transmission_rate(const Capacity& capacity, double t_span);

/// Exact binomial coefficient, nullopt on 64-bit overflow.
std::optional<std::uint64_t> binomial(std::uint64_t n, std::uint64_t k);

/// Bob's private modulation: the r tones and one random phase offset per tone.
struct ModulationPlan {
  std::vector<double> frequencies;  // Hz
  std::vector<double> offsets;      // seconds, each in [0, 1/f)
  double t_span = 1e-3;
};

/// Draws a fresh offset per tone from Bob's stream.
ModulationPlan make_modulation_plan(std::vector<double> frequencies, double t_span, Rng& rng);

/// Square-wave flip indicator for one tone. With half-period h = 1/(2f) the photon is flipped
/// when offset + 2nh < tau <= (2n+1)h + offset and left alone when
/// offset + (2n+1)h < tau <= (2n+2)h + offset.
bool flip_indicator(double frequency, double offset, double tau);

/// Per-pulse operation. With several tones the pulses are dealt out in turn: the i-th pulse
/// follows tone i mod r (tones in plan order), so each tone keeps its own spectral line.
std::vector<FlipOp> flip_schedule(const ModulationPlan& plan, const std::vector<double>& pulse_times);

struct Detection {
  std::uint8_t x = 0;  // 1 when Alice saw the state flipped
  double tau = 0.0;    // arrival time within the block, seconds

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct SymbolStream {
  std::vector<Detection> records;
  double t_span = 1e-3;

  /// Throws unless tau is strictly increasing inside [0, t_span] and x is binary.
  void validate() const;
  std::size_t ones() const;
};

struct Spectrum {
  FrequencyGrid grid;
  unsigned oversample = 1;
  std::vector<double> frequencies;  // f_min + k f_b / oversample
  std::vector<double> magnitudes;   // |X(f)|
  bool empty_stream = false;        // no x_i = 1 at all; every magnitude is zero

  /// Magnitudes at grid channels only.
  std::vector<double> channel_magnitudes() const;
};

/// X(f) = sum_i x_i exp(-j 2 pi f tau_i).
std::complex<double> dtft_at(const SymbolStream& stream, double frequency);

Spectrum dtft(const SymbolStream& stream, const FrequencyGrid& grid, unsigned oversample = 1);

struct DetectedTones {
  std::vector<double> frequencies;  // ascending
  std::vector<double> snr;          // peak / noise floor, same order
  double noise_floor = 0.0;
};

struct AmbiguousDetection {
  double noise_floor = 0.0;
  double weakest_snr = 0.0;
};

using ToneDetection = std::variant<DetectedTones, AmbiguousDetection>;

/// Takes the r strongest grid channels and accepts them only if every one beats
/// snr_threshold times the median of the remaining channels.
ToneDetection detect_tones(const Spectrum& spectrum, std::size_t r, double snr_threshold = 1.0);

struct UnmappedCodeword {
  std::uint64_t rank = 0;
};

using DecodedBits = std::variant<BitString, UnmappedCodeword>;

/// Lexicographic rank of a sorted r-subset of {0..n-1}.
std::uint64_t subset_rank(const std::vector<std::size_t>& subset, std::size_t n);
std::vector<std::size_t> subset_unrank(std::uint64_t rank, std::size_t n, std::size_t r);

/// Maps b-bit strings onto the first 2^b lexicographic r-subsets of the grid channels.
class Codebook {
 public:
  Codebook(FrequencyGrid grid, std::size_t r);

  const FrequencyGrid& grid() const { return grid_; }
  std::size_t tones() const { return r_; }
  std::size_t channels() const { return n_c_; }
  unsigned bits() const { return bits_; }

  std::vector<double> encode(const BitString& bits) const;
  DecodedBits decode(const std::vector<double>& tones) const;

 private:
  FrequencyGrid grid_;
  std::size_t r_;
  std::size_t n_c_;
  unsigned bits_;
};

BitString to_bits(std::uint64_t value, unsigned width);
std::uint64_t from_bits(const BitString& bits);

/// `frequency_hz,magnitude`, one row per evaluated frequency.
void write_spectrum_csv(std::ostream& os, const Spectrum& spectrum);

}  // namespace qsdc
