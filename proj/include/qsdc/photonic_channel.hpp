#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "qsdc/random.hpp"

namespace qsdc {

/// Weak-coherent-source fiber link. Lengths in km, loss in dB/km, rate in Hz.
struct ChannelParams {
  double mu = 0.1;             // mean photon number per pulse
  double alpha = 0.2;          // fiber loss, dB/km
  double l1_km = 0.0;          // Alice-Bob distance
  double l2_km = 0.0;          // delay line at Bob
  double eta_det = 0.32;       // detector quantum efficiency
  double e = 0.005;            // bit error rate of each measurement
  double check_fraction = 0.5; // C
  double f_rep = 10e6;         // pulse repetition frequency

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

enum class Leg : std::uint8_t { Forward, Backward, RoundTrip };

struct PulseOutcome {
  bool detected = false;
  bool flipped_by_noise = false;  // implies detected
  std::uint64_t slot_index = 0;
  std::uint32_t photons = 0;      // photons surviving to the detector
};

/// mu^n e^-mu / n!, evaluated in log space. Throws on mu <= 0.
double poisson_pmf(double mu, unsigned n);

/// 1 - p0 - p1 - p2. Series below mu = 1 where the closed form cancels, closed form above.
double poisson_tail_from3(double mu);

/// 10^(-alpha*length/10).
double fiber_transmittance(double alpha_db_per_km, double length_km);

/// Fiber length of each leg: L1 out, L1+L2 back (delay line then return), 2L1+L2 total.
double leg_length_km(const ChannelParams& p, Leg leg);

/// Series  sum_{n>=1} p_n [1 - (1 - eta_det eta (1-C))^n]  over total length 2L1+L2,
/// truncated once the terms past the Poisson mode drop below 1e-15.
double detection_probability_exact(const ChannelParams& p);

/// Analytic value of the same series for a Poisson source: 1 - exp(-mu eta_det eta (1-C)).
double detection_probability_closed_form(const ChannelParams& p);

/// Linearised form eta_det eta (1-C) mu.
double detection_probability_approx(const ChannelParams& p);

/// Non-empty when mu*eta_det*eta exceeds 0.1, where the linearisation starts to drift.
std::optional<std::string> linearization_warning(const ChannelParams& p);

/// Binomial thinning of a photon number by a transmittance.
std::uint32_t attenuate(std::uint32_t photons, double transmittance, Rng& rng);

std::uint32_t sample_photon_number(double mu, Rng& rng);

/// One fresh pulse down one leg. eta_det is applied on legs ending at Alice's detector
/// (Backward, RoundTrip); the check fraction is left to the caller.
PulseOutcome transmit_pulse(const ChannelParams& p, Leg leg, Rng& rng,
                            std::uint64_t slot_index = 0);

}  // namespace qsdc
