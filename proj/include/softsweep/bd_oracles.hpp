#ifndef SOFTSWEEP_BD_ORACLES_HPP
#define SOFTSWEEP_BD_ORACLES_HPP

// Closed-form results for linear birth-death processes and small exact
// simulators used as independent checks on the main simulator.

#include <cstdint>
#include <optional>
#include <vector>

#include "softsweep/families.hpp"
#include "softsweep/rng.hpp"

namespace softsweep {

/// Per-capita rates. With `logistic_c` set the per-capita death rate becomes
/// d + logistic_c * n / logistic_K. Immigrants arrive at constant rate and
/// each founds a new family of size 1.
struct BDRates {
  double b = 0.0;
  double d = 0.0;
  double immigration = 0.0;
  std::optional<double> logistic_c;
  double logistic_K = 1.0;
};

/// P_j(T_k < T_i) for i < j < k. With k = nullopt the upper level is
/// infinite (escape probability). b = d uses the limit (j - i)/(k - i).
double bd_hitting_prob(double b, double d, std::int64_t i, std::int64_t j,
                       std::optional<std::int64_t> k);

/// P_i(T_0 <= t) for b != d.
double bd_extinction_cdf(double b, double d, std::int64_t i, double t);

/// Almost-sure limit of T_N / log N on survival, 1 / (b - d), for 0 < d < b.
double bd_hitting_time_slope(double b, double d);

/// Stops when the size drops to `lower` or below, reaches `upper` or above,
/// when the horizon passes, or after max_events events.
struct BDStop {
  double horizon = 1e300;
  std::optional<std::int64_t> lower = 0;
  std::optional<std::int64_t> upper;
  std::uint64_t max_events = 1'000'000'000;
  std::vector<double> sample_times;  // ascending; sizes recorded at these times
  bool track_families = false;       // starting individuals form family 0
};

enum class BDExit { lower, upper, horizon, event_cap };

struct BDRecord {
  std::int64_t z_final = 0;
  double t_final = 0.0;
  BDExit exit = BDExit::horizon;
  std::uint64_t events = 0;
  std::vector<std::int64_t> samples;
  FamilyCounts families;
};

BDRecord simulate_bd(const BDRates& rates, std::int64_t z0, const BDStop& stop, Rng& rng);

/// Family counts of a birth-death process with immigration (rate imm_rate,
/// each immigrant founding a family) started from one seeded family, at time t.
FamilyCounts gem_oracle_population(double imm_rate, double b, double d, double t, Rng& rng);

/// Oldest-first surviving-family fractions of a supercritical birth-death
/// process with immigration, started from one seeded family, at time t.
std::vector<double> gem_oracle_families(double imm_rate, double b, double d, double t, Rng& rng);

struct CoupledPairReport {
  std::vector<double> times;
  std::vector<double> second_moment;  // E[(M1 - M2)^2] at each sample time
  double sup_second_moment = 0.0;
  double argsup_time = 0.0;
  // Monotone case only (b1 <= b2, d1 <= d2): moments against the auxiliary
  // process with rates (b2, d1), which dominates both.
  std::optional<double> sup_moment_31;
  std::optional<double> sup_moment_32;
  std::uint64_t reps = 0;
};

/// Couples BD(b1, d1) and BD(b2, d2), both from 1, on shared birth and death
/// Poisson measures and reports the empirical sup over `samples` equally
/// spaced times in (0, horizon] of E[(Z1 e^{-(b1-d1)t} - Z2 e^{-(b2-d2)t})^2].
CoupledPairReport coupled_bd_pair(double b1, double d1, double b2, double d2, double horizon,
                                  std::uint64_t reps, std::uint64_t seed, std::size_t samples = 50);

/// Fraction of replicates of the logistic process (birth b n, death
/// (d + c n / K) n) leaving [((b-d)/c - eta1) K, ((b-d)/c + eta2) K] before
/// `horizon`. Default start is the rounded equilibrium (b-d) K / c.
double logistic_sojourn(double b, double d, double c, double K, double eta1, double eta2,
                        double horizon, std::uint64_t reps, std::uint64_t seed,
                        std::optional<std::int64_t> start = std::nullopt);

}  // namespace softsweep

#endif  // SOFTSWEEP_BD_ORACLES_HPP
