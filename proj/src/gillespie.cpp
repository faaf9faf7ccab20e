#include "softsweep/gillespie.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace softsweep {

std::string to_string(EventClass event) {
  switch (event) {
    case EventClass::ancestral_birth: return "ancestral_birth";
    case EventClass::back_birth: return "back_birth";
    case EventClass::back_mutation: return "back_mutation";
    case EventClass::new_family: return "new_family";
    case EventClass::family_birth: return "family_birth";
    case EventClass::ancestral_death: return "ancestral_death";
    case EventClass::back_death: return "back_death";
    case EventClass::family_death: return "family_death";
  }
  return "unknown";
}

std::string to_string(Termination termination) {
  switch (termination) {
    case Termination::fixed: return "fixed";
    case Termination::a_extinct_cap: return "a_extinct_cap";
    case Termination::event_cap: return "event_cap";
    case Termination::time_cap: return "time_cap";
  }
  return "unknown";
}

double RateTable::total() const {
  double sum = 0.0;
  for (const double r : rates) sum += r;
  return sum;
}

RateTable event_rates(const EcoParams& params, const MutationProbabilities& mu, double K,
                      const PopulationState& state) {
  const auto anc = static_cast<double>(state.n_A_ancestral);
  const auto back = static_cast<double>(state.n_A_back);
  const double nA = anc + back;
  const auto na = static_cast<double>(state.n_a());

  RateTable table;
  table.death_per_capita_A = params.D_A + (params.C.AA * nA + params.C.Aa * na) / K;
  table.death_per_capita_a = params.D_a + (params.C.aA * nA + params.C.aa * na) / K;
  table.birth_per_capita_family = (1.0 - mu.aA) * params.f_a;

  const double clonal_A = (1.0 - mu.Aa) * params.f_A;
  auto& r = table.rates;
  r[static_cast<std::size_t>(EventClass::ancestral_birth)] = clonal_A * anc;
  r[static_cast<std::size_t>(EventClass::back_birth)] = clonal_A * back;
  r[static_cast<std::size_t>(EventClass::back_mutation)] = mu.aA * params.f_a * na;
  r[static_cast<std::size_t>(EventClass::new_family)] = mu.Aa * params.f_A * nA;
  r[static_cast<std::size_t>(EventClass::family_birth)] = table.birth_per_capita_family * na;
  r[static_cast<std::size_t>(EventClass::ancestral_death)] = table.death_per_capita_A * anc;
  r[static_cast<std::size_t>(EventClass::back_death)] = table.death_per_capita_A * back;
  r[static_cast<std::size_t>(EventClass::family_death)] = table.death_per_capita_a * na;
  return table;
}

RateTable event_rates(const EcoParams& params, const MutationRegime& regime, double K,
                      const PopulationState& state) {
  return event_rates(params, mutation_probability(regime, K), K, state);
}

namespace {

// floor(x K) tolerant of representation error in x, so that 0.29 * 100
// counts as 29 rather than 28.
std::int64_t scaled_floor(double x, double K) {
  const double v = x * K;
  return static_cast<std::int64_t>(std::floor(v + 1e-9 * std::max(1.0, std::abs(v))));
}

}  // namespace

PopulationState init_sweep(const EcoParams& params, double K, bool override_conditions) {
  if (!(K >= 1.0)) throw std::invalid_argument("init_sweep: K must be >= 1");
  validate(params);
  if (!override_conditions) {
    const auto report = validate_sweep_conditions(params);
    if (!report.ok) {
      std::string message = "init_sweep: sweep conditions fail:";
      for (const auto& f : report.failures) message += " " + f + ";";
      throw std::invalid_argument(message);
    }
  }
  const double nbar_A = equilibrium_density(params, Allele::A);
  if (!(nbar_A > 0.0)) throw std::invalid_argument("init_sweep: nbar_A must be positive");
  PopulationState state;
  state.n_A_ancestral = scaled_floor(nbar_A, K);
  state.n_A_back = 0;
  state.families = FamilyCounts({1});
  state.t = 0.0;
  return state;
}

namespace {

enum class StepResult { fired, absorbed, time_limit };

// Draws the next event. When it would occur after time_limit the clock is
// set to time_limit and nothing else changes.
StepResult advance(PopulationState& state, const EcoParams& params, const MutationProbabilities& mu,
                   double K, Rng& rng, double time_limit, EventClass& fired) {
  const RateTable table = event_rates(params, mu, K, state);
  const double total = table.total();
  if (!(total > 0.0)) return StepResult::absorbed;

  const double dt = rng.exponential(total);
  if (state.t + dt > time_limit) {
    state.t = time_limit;
    return StepResult::time_limit;
  }
  state.t += dt;

  double target = rng.uniform() * total;
  std::size_t chosen = kEventClassCount - 1;
  for (std::size_t k = 0; k < kEventClassCount; ++k) {
    if (target < table.rates[k]) {
      chosen = k;
      break;
    }
    target -= table.rates[k];
  }
  // Rounding can leave target past the last class; fall back to the last
  // class with positive rate.
  while (table.rates[chosen] <= 0.0 && chosen > 0) --chosen;

  fired = static_cast<EventClass>(chosen);
  switch (fired) {
    case EventClass::ancestral_birth: ++state.n_A_ancestral; break;
    case EventClass::back_birth: ++state.n_A_back; break;
    case EventClass::back_mutation: ++state.n_A_back; break;
    case EventClass::new_family: state.families.append(1); break;
    case EventClass::family_birth: {
      const auto rank = static_cast<std::int64_t>(rng.index(static_cast<std::uint64_t>(state.n_a())));
      state.families.add(state.families.find(rank), +1);
      break;
    }
    case EventClass::ancestral_death: --state.n_A_ancestral; break;
    case EventClass::back_death: --state.n_A_back; break;
    case EventClass::family_death: {
      const auto rank = static_cast<std::int64_t>(rng.index(static_cast<std::uint64_t>(state.n_a())));
      state.families.add(state.families.find(rank), -1);
      break;
    }
  }
  ++state.tallies[chosen];
  return StepResult::fired;
}

}  // namespace

std::optional<EventClass> step(PopulationState& state, const EcoParams& params,
                               const MutationProbabilities& mu, double K, Rng& rng) {
  EventClass fired{};
  const StepResult result =
      advance(state, params, mu, K, rng, std::numeric_limits<double>::infinity(), fired);
  if (result != StepResult::fired) return std::nullopt;
  return fired;
}

double default_epsilon(const EcoParams& params) {
  const double nbar_A = equilibrium_density(params, Allele::A);
  const double nbar_a = equilibrium_density(params, Allele::a);
  return 0.05 * std::min({1.0, nbar_A, nbar_a});
}

double epsilon_bound(const EcoParams& params) {
  const double S_aA = invasion_fitness(params, Allele::a);
  const double bound = S_aA / (2.0 * params.C.aA * params.C.Aa / params.C.AA + params.C.aa);
  return std::min(bound, equilibrium_density(params, Allele::a));
}

SweepOutcome run_sweep(const EcoParams& params, const MutationRegime& regime, double K,
                       std::uint64_t seed, const SweepCaps& caps) {
  validate(regime);
  PopulationState state = init_sweep(params, K, caps.override_conditions);
  const MutationProbabilities mu = mutation_probability(regime, K);

  const double nbar_A = equilibrium_density(params, Allele::A);
  const double S_aA = invasion_fitness(params, Allele::a);
  const double S_Aa = invasion_fitness(params, Allele::A);

  SweepOutcome out;
  out.seed = seed;
  out.K = K;
  out.regime = regime_index(regime);
  out.epsilon = caps.epsilon.value_or(default_epsilon(params));
  if (!caps.override_conditions && !(out.epsilon > 0.0 && out.epsilon < epsilon_bound(params))) {
    throw std::invalid_argument("run_sweep: epsilon = " + std::to_string(out.epsilon) +
                                " outside the admissible range (0, " +
                                std::to_string(epsilon_bound(params)) + ")");
  }
  const double max_time = caps.max_time.value_or(10.0 * std::log(K) * (1.0 / S_aA + 1.0 / std::abs(S_Aa)));

  const auto eps_level = scaled_floor(out.epsilon, K);
  const double half_width = 2.0 * out.epsilon * params.C.Aa / params.C.AA;
  const double window_lo = K * (nbar_A - half_width);
  const double window_hi = K * (nbar_A + half_width);
  auto outside_window = [&](std::int64_t n) {
    const auto x = static_cast<double>(n);
    return x < window_lo || x > window_hi;
  };

  if (state.n_a() >= eps_level) out.T_eps = 0.0;
  if (outside_window(state.n_A())) out.S_eps = 0.0;

  Rng rng(seed);
  std::uint64_t events = 0;
  for (;;) {
    if (state.n_A_ancestral == 0) {
      out.T_F = state.t;
      out.termination = Termination::fixed;
      break;
    }
    if (state.n_a() == 0 && mu.Aa == 0.0) {
      out.termination = Termination::a_extinct_cap;
      break;
    }
    if (events >= caps.max_events) {
      out.termination = Termination::event_cap;
      break;
    }
    EventClass fired{};
    const StepResult result = advance(state, params, mu, K, rng, max_time, fired);
    if (result == StepResult::time_limit) {
      out.termination = Termination::time_cap;
      break;
    }
    if (result == StepResult::absorbed) {
      // Only reachable with no A and no a left, which the fixation check
      // above already handles; kept for safety against zero-rate states.
      out.termination = Termination::a_extinct_cap;
      break;
    }
    ++events;
    if (!out.T_eps && state.n_a() == eps_level) out.T_eps = state.t;
    if (!out.S_eps && outside_window(state.n_A())) out.S_eps = state.t;
  }

  out.spectrum = haplotype_spectrum(state);
  if (state.n_a() >= 2) out.identity = pairwise_identity(state);
  out.tallies = state.tallies;
  out.t_end = state.t;
  out.n_A_ancestral = state.n_A_ancestral;
  out.n_A_back = state.n_A_back;
  out.n_a = state.n_a();
  out.families_founded = state.families.size();
  return out;
}

std::vector<double> haplotype_spectrum(const FamilyCounts& families) {
  std::vector<double> out;
  const std::int64_t total = families.total();
  if (total <= 0) return out;
  const auto denom = static_cast<double>(total);
  for (const std::int64_t c : families.counts()) {
    if (c > 0) out.push_back(static_cast<double>(c) / denom);
  }
  return out;
}

std::vector<double> haplotype_spectrum(const PopulationState& state) {
  return haplotype_spectrum(state.families);
}

double pairwise_identity(const FamilyCounts& families) {
  const std::int64_t total = families.total();
  if (total < 2) throw std::invalid_argument("pairwise_identity: needs at least two a individuals");
  double same = 0.0;
  for (const std::int64_t c : families.counts()) {
    same += static_cast<double>(c) * static_cast<double>(c - 1);
  }
  return same / (static_cast<double>(total) * static_cast<double>(total - 1));
}

double pairwise_identity(const PopulationState& state) { return pairwise_identity(state.families); }

}  // namespace softsweep
