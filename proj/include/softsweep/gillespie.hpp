#ifndef SOFTSWEEP_GILLESPIE_HPP
#define SOFTSWEEP_GILLESPIE_HPP

// Exact event-driven simulation of the two-allele process with recurrent
// mutation, back mutation and per-origin family tracking.

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "softsweep/families.hpp"
#include "softsweep/model.hpp"
#include "softsweep/rng.hpp"

namespace softsweep {

enum class EventClass : int {
  ancestral_birth = 0,  // clonal birth of an ancestral A
  back_birth,           // clonal birth of a back-mutant A
  back_mutation,        // a parent, A child (credited to back-mutant A)
  new_family,           // A parent, a child founding a new family
  family_birth,         // clonal a birth within a family
  ancestral_death,
  back_death,
  family_death,
};

inline constexpr std::size_t kEventClassCount = 8;
std::string to_string(EventClass event);

using EventTallies = std::array<std::uint64_t, kEventClassCount>;

struct PopulationState {
  std::int64_t n_A_ancestral = 0;
  std::int64_t n_A_back = 0;
  FamilyCounts families;
  double t = 0.0;
  EventTallies tallies{};

  std::int64_t n_A() const { return n_A_ancestral + n_A_back; }
  std::int64_t n_a() const { return families.total(); }
};

/// Rates of every event class. Per-family classes are aggregated over
/// families; a single family i carries the share N_i / N_a.
struct RateTable {
  std::array<double, kEventClassCount> rates{};
  double death_per_capita_A = 0.0;  // D_A + C_AA n_A/K + C_Aa n_a/K
  double death_per_capita_a = 0.0;
  double birth_per_capita_family = 0.0;  // (1 - mu^{aA}) f_a

  double operator[](EventClass e) const { return rates[static_cast<std::size_t>(e)]; }
  double total() const;
};

RateTable event_rates(const EcoParams& params, const MutationProbabilities& mu, double K,
                      const PopulationState& state);
RateTable event_rates(const EcoParams& params, const MutationRegime& regime, double K,
                      const PopulationState& state);

/// Initial condition (floor(n̄_A K) ancestral A, one a-family of size 1).
/// Throws std::invalid_argument for K < 1 or invalid parameters, and when the
/// sweep conditions fail unless `override_conditions` is set.
PopulationState init_sweep(const EcoParams& params, double K, bool override_conditions = false);

/// One exact step. Returns the event that fired, or nullopt when the total
/// rate is zero (absorbing state; `state` is left unchanged).
std::optional<EventClass> step(PopulationState& state, const EcoParams& params,
                               const MutationProbabilities& mu, double K, Rng& rng);

enum class Termination { fixed, a_extinct_cap, event_cap, time_cap };
std::string to_string(Termination termination);

struct SweepCaps {
  std::optional<double> epsilon;   // default 0.05 min(1, n̄_A, n̄_a)
  std::uint64_t max_events = 500'000'000;
  std::optional<double> max_time;  // default 10 log K (1/S_aA + 1/|S_Aa|)
  bool override_conditions = false;
};

struct SweepOutcome {
  std::uint64_t seed = 0;
  double K = 0.0;
  int regime = 0;
  double epsilon = 0.0;
  std::optional<double> T_eps;  // first time N_a = floor(eps K)
  std::optional<double> S_eps;  // first exit of N_A from I_eps^K
  std::optional<double> T_F;    // ancestral A extinct
  std::vector<double> spectrum;
  std::optional<double> identity;
  EventTallies tallies{};
  Termination termination = Termination::event_cap;
  double t_end = 0.0;
  std::int64_t n_A_ancestral = 0;
  std::int64_t n_A_back = 0;
  std::int64_t n_a = 0;
  std::size_t families_founded = 0;
};

/// Default epsilon, 0.05 min(1, n̄_A, n̄_a).
double default_epsilon(const EcoParams& params);
/// Admissible upper bound S_aA / (2 C_aA C_Aa / C_AA + C_aa), also capped by n̄_a.
double epsilon_bound(const EcoParams& params);

/// Runs one sweep from init_sweep until the ancestral A class dies out or a
/// cap is hit. Cap exhaustion is reported through `termination`.
SweepOutcome run_sweep(const EcoParams& params, const MutationRegime& regime, double K,
                       std::uint64_t seed, const SweepCaps& caps = {});

/// Fractions N_i / N_a of the surviving families, oldest first.
std::vector<double> haplotype_spectrum(const FamilyCounts& families);
std::vector<double> haplotype_spectrum(const PopulationState& state);

/// Probability that two a individuals drawn without replacement share a
/// mutational origin. Throws std::invalid_argument when N_a < 2.
double pairwise_identity(const FamilyCounts& families);
double pairwise_identity(const PopulationState& state);

}  // namespace softsweep

#endif  // SOFTSWEEP_GILLESPIE_HPP
