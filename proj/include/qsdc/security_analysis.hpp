#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "qsdc/photonic_channel.hpp"

namespace qsdc {

/// Mean qubits per pulse an eavesdropper collects with each strategy.
struct EveYield {
  double r_n1 = 0.0;  // single photons, hidden in channel noise
  double r_n2 = 0.0;  // two-photon splitting, parallel/antiparallel discrimination
  double r_n3 = 0.0;  // three or more photons, conclusive flip measurement
  double total = 0.0;
};

/// Block parameters the rate formulas need from the codec side.
struct LinkBudget {
  double photons_per_block = 80.0;  // N
  double bits_per_block = 4.0;      // b
  double t_span = 1e-3;             // seconds
};

struct SecurityReport {
  ChannelParams params;
  LinkBudget budget;
  EveYield eve;
  double r_alice = 0.0;         // photons per pulse reaching Alice's detector
  double i_alice = 0.0;         // b R_Alice / (N T_span)
  double bits_per_pulse = 0.0;  // b R_Alice / N
  double ratio = 0.0;           // R_Alice / R_Eve (inf when Eve gets nothing)
  bool secure = false;          // ratio > N / b
};

/// (1/4) 10^(-alpha L2/10) p_2 (1-C)
double eve_n2(const ChannelParams& p);

/// (1/2) 10^(-alpha L2/10) (1-C) sum_{n>=3} p_n, tail taken in closed form.
double eve_n3(const ChannelParams& p);

/// 4 10^(-alpha (L1+L2)/10) p_1 e (1-C). The factor 4 converts the observed error rate into the
/// fraction Eve can intercept unnoticed: half her basis guesses are wrong and half of those
/// still produce no error. Note the single L1 here against 2 L1 + L2 in Alice's rate.
double eve_n1(const ChannelParams& p);

EveYield eve_yield(const ChannelParams& p);

struct AliceRate {
  double r_alice = 0.0;
  double i_alice = 0.0;
};

/// R_Alice = 10^(-alpha (2L1+L2)/10) eta_det mu (1-C), I_Alice = b R_Alice / (N T_span).
AliceRate alice_rate(const ChannelParams& p, const LinkBudget& budget);

SecurityReport assess(const ChannelParams& p, const LinkBudget& budget);

/// One report per (mu, L1) with L2 = L1, ordered by mu list then distance.
std::vector<SecurityReport> security_sweep(const ChannelParams& base, const std::vector<double>& mu_list,
                                           const std::vector<double>& l1_grid_km,
                                           const LinkBudget& budget);

/// Largest L1 on the sweep with a secure verdict for this mu; nullopt if none.
std::optional<double> secure_distance(const std::vector<SecurityReport>& sweep, double mu);

/// Default legend of the distance sweep.
std::vector<double> default_mu_list();

/// start, start+step, ... up to stop inclusive.
std::vector<double> linear_grid(double start, double stop, double step);

/// `mu,l1_km,bits_per_pulse,ratio,secure`
void write_sweep_csv(std::ostream& os, const std::vector<SecurityReport>& sweep);

}  // namespace qsdc
