#include "qsdc/security_analysis.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "qsdc/format.hpp"

namespace qsdc {

double eve_n2(const ChannelParams& p) {
  return 0.25 * fiber_transmittance(p.alpha, p.l2_km) * poisson_pmf(p.mu, 2) * (1.0 - p.check_fraction);
}

double eve_n3(const ChannelParams& p) {
  return 0.5 * fiber_transmittance(p.alpha, p.l2_km) * (1.0 - p.check_fraction) * poisson_tail_from3(p.mu);
}

double eve_n1(const ChannelParams& p) {
  return 4.0 * fiber_transmittance(p.alpha, p.l1_km + p.l2_km) * poisson_pmf(p.mu, 1) * p.e *
         (1.0 - p.check_fraction);
}

EveYield eve_yield(const ChannelParams& p) {
  EveYield y;
  y.r_n1 = eve_n1(p);
  y.r_n2 = eve_n2(p);
  y.r_n3 = eve_n3(p);
  y.total = y.r_n1 + y.r_n2 + y.r_n3;
  return y;
}

AliceRate alice_rate(const ChannelParams& p, const LinkBudget& budget) {
  if (!(budget.photons_per_block > 0.0) || !(budget.t_span > 0.0))
    throw std::invalid_argument("alice_rate: N and T_span must be > 0");
  AliceRate a;
  a.r_alice = fiber_transmittance(p.alpha, 2.0 * p.l1_km + p.l2_km) * p.eta_det * p.mu *
              (1.0 - p.check_fraction);
  a.i_alice = budget.bits_per_block * a.r_alice / (budget.photons_per_block * budget.t_span);
  return a;
}

SecurityReport assess(const ChannelParams& p, const LinkBudget& budget) {
  SecurityReport r;
  r.params = p;
  r.budget = budget;
  r.eve = eve_yield(p);
  const auto a = alice_rate(p, budget);
  r.r_alice = a.r_alice;
  r.i_alice = a.i_alice;
  r.bits_per_pulse = budget.bits_per_block * a.r_alice / budget.photons_per_block;
  if (r.eve.total > 0.0) {
    r.ratio = r.r_alice / r.eve.total;
  } else {
    r.ratio = r.r_alice > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  r.secure = r.ratio > budget.photons_per_block / budget.bits_per_block;
  return r;
}

std::vector<SecurityReport> security_sweep(const ChannelParams& base, const std::vector<double>& mu_list,
                                           const std::vector<double>& l1_grid_km,
                                           const LinkBudget& budget) {
  std::vector<SecurityReport> out;
  out.reserve(mu_list.size() * l1_grid_km.size());
  for (double mu : mu_list) {
    for (double l1 : l1_grid_km) {
      ChannelParams p = base;
      p.mu = mu;
      p.l1_km = l1;
      p.l2_km = l1;
      p.validate();
      out.push_back(assess(p, budget));
    }
  }
  return out;
}

std::optional<double> secure_distance(const std::vector<SecurityReport>& sweep, double mu) {
  std::optional<double> best;
  for (const auto& r : sweep)
    if (r.params.mu == mu && r.secure && (!best || r.params.l1_km > *best)) best = r.params.l1_km;
  return best;
}

std::vector<double> default_mu_list() {
  return {0.19, 0.17, 0.15, 0.13, 0.11, 0.09, 0.07, 0.05, 0.03, 0.01};
}

std::vector<double> linear_grid(double start, double stop, double step) {
  if (!(step > 0.0) || stop < start) throw std::invalid_argument("grid: need step > 0 and stop >= start");
  std::vector<double> g;
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) g.push_back(start + step * static_cast<double>(i));
  return g;
}

void write_sweep_csv(std::ostream& os, const std::vector<SecurityReport>& sweep) {
  os << "mu,l1_km,bits_per_pulse,ratio,secure\n";
  for (const auto& r : sweep)
    os << format_number(r.params.mu) << ',' << format_number(r.params.l1_km) << ','
       << format_number(r.bits_per_pulse) << ',' << format_number(r.ratio) << ','
       << (r.secure ? 1 : 0) << '\n';
}

}  // namespace qsdc
