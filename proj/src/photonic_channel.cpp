#include "qsdc/photonic_channel.hpp"

#include <cmath>
#include <stdexcept>

#include "qsdc/format.hpp"

namespace qsdc {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void ChannelParams::validate() const {
  require(std::isfinite(mu) && mu > 0.0, "mu: mean photon number must be > 0");
  require(std::isfinite(alpha) && alpha >= 0.0, "alpha: fiber loss must be >= 0");
  require(std::isfinite(l1_km) && l1_km >= 0.0, "l1_km: distance must be >= 0");
  require(std::isfinite(l2_km) && l2_km >= 0.0, "l2_km: delay line must be >= 0");
  require(eta_det >= 0.0 && eta_det <= 1.0, "eta_det: must lie in [0, 1]");
  require(e >= 0.0 && e < 0.5, "e: bit error rate must lie in [0, 0.5)");
  require(check_fraction > 0.0 && check_fraction <= 0.5,
          "check_fraction: C is a positive number less or equal to 1/2");
  require(std::isfinite(f_rep) && f_rep > 0.0, "f_rep: repetition frequency must be > 0");
}

double poisson_pmf(double mu, unsigned n) {
  if (!(mu > 0.0)) throw std::invalid_argument("poisson_pmf: mu must be > 0");
  const double nd = static_cast<double>(n);
  return std::exp(nd * std::log(mu) - mu - std::lgamma(nd + 1.0));
}

double poisson_tail_from3(double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("poisson_tail_from3: mu must be > 0");
  // Below mu = 1 the direct 1 - (...) cancels badly (the tail is ~mu^3/6), so sum the series
  // until the terms drop below double resolution.
  if (mu < 1.0) {
    double term = std::exp(-mu) * mu * mu * mu / 6.0;
    double sum = 0.0;
    for (unsigned n = 3; term > 1e-300 && n < 200; ++n) {
      sum += term;
      term *= mu / static_cast<double>(n + 1);
      if (term < sum * 1e-17) break;
    }
    return sum;
  }
  return -std::expm1(-mu) - std::exp(-mu) * (mu + 0.5 * mu * mu);
}

double fiber_transmittance(double alpha_db_per_km, double length_km) {
  return std::pow(10.0, -alpha_db_per_km * length_km / 10.0);
}

double leg_length_km(const ChannelParams& p, Leg leg) {
  switch (leg) {
    case Leg::Forward:
      return p.l1_km;
    case Leg::Backward:
      return p.l1_km + p.l2_km;
    case Leg::RoundTrip:
      break;
  }
  return 2.0 * p.l1_km + p.l2_km;
}

namespace {

double per_photon_yield(const ChannelParams& p) {
  return p.eta_det * fiber_transmittance(p.alpha, leg_length_km(p, Leg::RoundTrip)) *
         (1.0 - p.check_fraction);
}

}  // namespace

double detection_probability_exact(const ChannelParams& p) {
  const double q = per_photon_yield(p);
  double sum = 0.0;
  const auto mode = static_cast<unsigned>(std::floor(p.mu));
  for (unsigned n = 1;; ++n) {
    const double pn = poisson_pmf(p.mu, n);
    sum += pn * -std::expm1(static_cast<double>(n) * std::log1p(-q));
    if (n > mode && pn < 1e-15) break;
  }
  return sum;
}

double detection_probability_closed_form(const ChannelParams& p) {
  return -std::expm1(-p.mu * per_photon_yield(p));
}

double detection_probability_approx(const ChannelParams& p) { return per_photon_yield(p) * p.mu; }

std::optional<std::string> linearization_warning(const ChannelParams& p) {
  const double load =
      p.mu * p.eta_det * fiber_transmittance(p.alpha, leg_length_km(p, Leg::RoundTrip));
  if (load <= 0.1) return std::nullopt;
  return "mu*eta_det*eta = " + format_number(load) +
         " > 0.1: the linearised detection probability is inaccurate";
}

std::uint32_t attenuate(std::uint32_t photons, double transmittance, Rng& rng) {
  if (photons == 0 || transmittance <= 0.0) return 0;
  if (transmittance >= 1.0) return photons;
  return std::binomial_distribution<std::uint32_t>{photons, transmittance}(rng);
}

std::uint32_t sample_photon_number(double mu, Rng& rng) {
  return std::poisson_distribution<std::uint32_t>{mu}(rng);
}

PulseOutcome transmit_pulse(const ChannelParams& p, Leg leg, Rng& rng, std::uint64_t slot_index) {
  PulseOutcome out;
  out.slot_index = slot_index;
  double t = fiber_transmittance(p.alpha, leg_length_km(p, leg));
  if (leg != Leg::Forward) t *= p.eta_det;
  out.photons = attenuate(sample_photon_number(p.mu, rng), t, rng);
  out.detected = out.photons > 0;
  out.flipped_by_noise = out.detected && bernoulli(rng, p.e);
  return out;
}

}  // namespace qsdc
