#include "qsdc/frequency_codec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "qsdc/format.hpp"

namespace qsdc {

FrequencyGrid FrequencyGrid::from_bandwidth(double f_min, double bandwidth, double f_b) {
  if (!(f_b > 0.0) || !(bandwidth >= 0.0))
    throw std::invalid_argument("grid: bandwidth must be >= 0 and f_b > 0");
  // Tolerate the usual decimal noise before flooring.
  const double steps = std::floor(bandwidth / f_b * (1.0 + 1e-12));
  return FrequencyGrid{f_min, f_min + steps * f_b, f_b};
}

namespace {

double span_steps(const FrequencyGrid& g) { return (g.f_max - g.f_min) / g.f_b; }

}  // namespace

void FrequencyGrid::validate() const {
  if (!(f_min > 0.0)) throw std::invalid_argument("grid: f_min must be > 0");
  if (!(f_max >= f_min)) throw std::invalid_argument("grid: f_max must be >= f_min");
  if (!(f_b > 0.0)) throw std::invalid_argument("grid: f_b must be > 0");
  const double steps = span_steps(*this);
  if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
    throw std::invalid_argument("grid: (f_max - f_min) is not an integer multiple of f_b");
}

std::optional<std::size_t> FrequencyGrid::channel_of(double f) const {
  const double k = (f - f_min) / f_b;
  const double kr = std::round(k);
  if (kr < 0.0 || std::abs(k - kr) > 1e-6) return std::nullopt;
  const auto idx = static_cast<std::size_t>(kr);
  if (idx >= channel_count(*this)) return std::nullopt;
  return idx;
}

std::size_t channel_count(const FrequencyGrid& grid) {
  grid.validate();
  return static_cast<std::size_t>(std::llround(span_steps(grid))) + 1;
}

std::optional<std::uint64_t> binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t acc = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // acc * (n - k + i) / i is integral; cancel the common factor first so only a genuine
    // overflow of the result trips the check.
    const std::uint64_t g = std::gcd(acc, i);
    acc /= g;
    const std::uint64_t num = (n - k + i) / (i / g);
    if (acc > std::numeric_limits<std::uint64_t>::max() / num) return std::nullopt;
    acc *= num;
  }
  return acc;
}

Capacity combinatorial_capacity(std::size_t n_c, std::size_t r) {
  if (r == 0 || r > n_c)
    throw std::invalid_argument("capacity: need 1 <= r <= N_c (got r=" + std::to_string(r) +
                                ", N_c=" + std::to_string(n_c) + ")");
  Capacity c;
  c.n_max = binomial(n_c, r);
  const auto k = std::min(r, n_c - r);
  double log2v = 0.0;
  for (std::size_t i = 1; i <= k; ++i)
    log2v += std::log2(static_cast<double>(n_c - k + i)) - std::log2(static_cast<double>(i));
  c.log2_n_max = log2v;
  if (c.n_max) {
    c.bits = static_cast<unsigned>(std::bit_width(*c.n_max) - 1);
  } else {
    c.bits = static_cast<unsigned>(std::floor(log2v));
  }
  return c;
}

double transmission_rate(std::uint64_t n_max, double t_span) {
  if (n_max < 1 || !(t_span > 0.0))
    throw std::invalid_argument("transmission_rate: need N_max >= 1 and t_span > 0");
  return std::log2(static_cast<double>(n_max)) / t_span;
}

double transmission_rate(const Capacity& capacity, double t_span) {
  if (!(t_span > 0.0)) throw std::invalid_argument("transmission_rate: t_span must be > 0");
  return capacity.log2_n_max / t_span;
}

ModulationPlan make_modulation_plan(std::vector<double> frequencies, double t_span, Rng& rng) {
  ModulationPlan plan;
  plan.t_span = t_span;
  plan.offsets.reserve(frequencies.size());
  for (double f : frequencies) {
    if (!(f > 0.0)) throw std::invalid_argument("modulation plan: frequencies must be > 0");
    plan.offsets.push_back(std::uniform_real_distribution<double>{0.0, 1.0 / f}(rng));
  }
  plan.frequencies = std::move(frequencies);
  return plan;
}

bool flip_indicator(double frequency, double offset, double tau) {
  const double half_period = 0.5 / frequency;
  // tau lies in (offset + (k-1)h, offset + kh]; odd k is a flip interval.
  const double k = std::ceil((tau - offset) / half_period);
  return std::fmod(std::abs(k), 2.0) == 1.0;
}

std::vector<FlipOp> flip_schedule(const ModulationPlan& plan, const std::vector<double>& pulse_times) {
  if (plan.frequencies.size() != plan.offsets.size())
    throw std::invalid_argument("flip_schedule: one offset per frequency required");
  std::vector<FlipOp> ops;
  ops.reserve(pulse_times.size());
  const std::size_t r = plan.frequencies.size();
  if (r == 0) throw std::invalid_argument("flip_schedule: no tones");
  for (std::size_t i = 0; i < pulse_times.size(); ++i) {
    const std::size_t k = i % r;
    const bool flip = flip_indicator(plan.frequencies[k], plan.offsets[k], pulse_times[i]);
    ops.push_back(flip ? FlipOp::Flip : FlipOp::Identity);
  }
  return ops;
}

void SymbolStream::validate() const {
  double prev = -1.0;
  for (const auto& r : records) {
    if (r.x > 1) throw std::invalid_argument("symbol stream: x must be 0 or 1");
    if (r.tau < 0.0 || r.tau > t_span)
      throw std::invalid_argument("symbol stream: tau outside [0, t_span]");
    if (!(r.tau > prev)) throw std::invalid_argument("symbol stream: tau must be strictly increasing");
    prev = r.tau;
  }
}

std::size_t SymbolStream::ones() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const Detection& d) { return d.x == 1; }));
}

std::vector<double> Spectrum::channel_magnitudes() const {
  std::vector<double> out;
  for (std::size_t k = 0; k < magnitudes.size(); k += oversample) out.push_back(magnitudes[k]);
  return out;
}

std::complex<double> dtft_at(const SymbolStream& stream, double frequency) {
  double re = 0.0;
  double im = 0.0;
  for (const auto& r : stream.records) {
    if (r.x == 0) continue;
    // Reduce to the fractional cycle before scaling by 2 pi.
    const double cycles = frequency * r.tau;
    const double phase = 2.0 * std::numbers::pi * (cycles - std::floor(cycles));
    re += std::cos(phase);
    im -= std::sin(phase);
  }
  return {re, im};
}

Spectrum dtft(const SymbolStream& stream, const FrequencyGrid& grid, unsigned oversample) {
  if (oversample == 0) throw std::invalid_argument("dtft: oversample must be >= 1");
  const std::size_t n_c = channel_count(grid);
  Spectrum s;
  s.grid = grid;
  s.oversample = oversample;
  s.empty_stream = stream.ones() == 0;
  const std::size_t points = (n_c - 1) * oversample + 1;
  s.frequencies.reserve(points);
  s.magnitudes.reserve(points);
  const double step = grid.f_b / oversample;
  for (std::size_t k = 0; k < points; ++k) {
    const double f = grid.f_min + step * static_cast<double>(k);
    s.frequencies.push_back(f);
    s.magnitudes.push_back(s.empty_stream ? 0.0 : std::abs(dtft_at(stream, f)));
  }
  return s;
}

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

ToneDetection detect_tones(const Spectrum& spectrum, std::size_t r, double snr_threshold) {
  if (r == 0) throw std::invalid_argument("detect_tones: r must be >= 1");
  if (snr_threshold < 1.0) throw std::invalid_argument("detect_tones: snr_threshold must be >= 1");
  const auto mags = spectrum.channel_magnitudes();
  if (mags.size() <= r) return AmbiguousDetection{};

  std::vector<std::size_t> order(mags.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return mags[a] > mags[b]; });

  std::vector<double> rest;
  for (std::size_t i = r; i < order.size(); ++i) rest.push_back(mags[order[i]]);
  const double floor = median_of(std::move(rest));

  std::vector<std::size_t> peaks(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(r));
  std::sort(peaks.begin(), peaks.end());

  DetectedTones found;
  found.noise_floor = floor;
  double weakest = std::numeric_limits<double>::infinity();
  for (std::size_t ch : peaks) {
    const double snr = floor > 0.0 ? mags[ch] / floor
                                   : (mags[ch] > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    weakest = std::min(weakest, snr);
    found.frequencies.push_back(spectrum.grid.frequency(ch));
    found.snr.push_back(snr);
  }
  if (!(weakest > snr_threshold)) return AmbiguousDetection{floor, weakest};
  return found;
}

std::uint64_t subset_rank(const std::vector<std::size_t>& subset, std::size_t n) {
  const std::size_t r = subset.size();
  std::uint64_t rank = 0;
  std::size_t next = 0;
  for (std::size_t pos = 0; pos < r; ++pos) {
    if (subset[pos] < next || subset[pos] >= n)
      throw std::invalid_argument("subset_rank: subset must be strictly increasing within [0, n)");
    for (std::size_t x = next; x < subset[pos]; ++x) rank += *binomial(n - 1 - x, r - 1 - pos);
    next = subset[pos] + 1;
  }
  return rank;
}

std::vector<std::size_t> subset_unrank(std::uint64_t rank, std::size_t n, std::size_t r) {
  std::vector<std::size_t> out;
  out.reserve(r);
  std::size_t x = 0;
  for (std::size_t pos = 0; pos < r; ++pos) {
    for (;;) {
      if (x >= n) throw std::out_of_range("subset_unrank: rank too large");
      const std::uint64_t block = *binomial(n - 1 - x, r - 1 - pos);
      if (rank < block) break;
      rank -= block;
      ++x;
    }
    out.push_back(x++);
  }
  if (rank != 0) throw std::out_of_range("subset_unrank: rank too large");
  return out;
}

BitString to_bits(std::uint64_t value, unsigned width) {
  BitString bits(width);
  for (unsigned i = 0; i < width; ++i) bits[width - 1 - i] = static_cast<std::uint8_t>((value >> i) & 1U);
  return bits;
}

std::uint64_t from_bits(const BitString& bits) {
  std::uint64_t v = 0;
  for (auto b : bits) {
    if (b > 1) throw std::invalid_argument("bit string: elements must be 0 or 1");
    v = (v << 1) | b;
  }
  return v;
}

Codebook::Codebook(FrequencyGrid grid, std::size_t r) : grid_(grid), r_(r), n_c_(channel_count(grid)) {
  const auto cap = combinatorial_capacity(n_c_, r_);
  if (!cap.n_max || cap.bits > 63)
    throw std::invalid_argument("codebook: binomial(N_c, r) too large for a 64-bit codebook");
  bits_ = cap.bits;
}

std::vector<double> Codebook::encode(const BitString& bits) const {
  if (bits.size() != bits_)
    throw std::invalid_argument("codebook: expected " + std::to_string(bits_) + " bits, got " +
                                std::to_string(bits.size()));
  std::vector<double> tones;
  for (auto ch : subset_unrank(from_bits(bits), n_c_, r_)) tones.push_back(grid_.frequency(ch));
  return tones;
}

DecodedBits Codebook::decode(const std::vector<double>& tones) const {
  if (tones.size() != r_) throw std::invalid_argument("codebook: wrong number of tones");
  std::vector<std::size_t> channels;
  for (double f : tones) {
    const auto ch = grid_.channel_of(f);
    if (!ch) throw std::invalid_argument("codebook: tone " + format_number(f) + " Hz is off-grid");
    channels.push_back(*ch);
  }
  std::sort(channels.begin(), channels.end());
  if (std::adjacent_find(channels.begin(), channels.end()) != channels.end())
    throw std::invalid_argument("codebook: duplicate tones");
  const std::uint64_t rank = subset_rank(channels, n_c_);
  if (bits_ < 64 && rank >= (std::uint64_t{1} << bits_)) return UnmappedCodeword{rank};
  return to_bits(rank, bits_);
}

void write_spectrum_csv(std::ostream& os, const Spectrum& spectrum) {
  os << "frequency_hz,magnitude\n";
  for (std::size_t k = 0; k < spectrum.frequencies.size(); ++k)
    os << format_number(spectrum.frequencies[k]) << ',' << format_number(spectrum.magnitudes[k]) << '\n';
}

}  // namespace qsdc
