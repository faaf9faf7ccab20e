#include "softsweep/bd_oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "softsweep/gillespie.hpp"

namespace softsweep {

double bd_hitting_prob(double b, double d, std::int64_t i, std::int64_t j,
                       std::optional<std::int64_t> k) {
  if (!(b > 0.0) || !(d >= 0.0)) throw std::invalid_argument("bd_hitting_prob: need b > 0, d >= 0");
  if (j < i || (k && *k < j)) throw std::invalid_argument("bd_hitting_prob: need i <= j <= k");
  if (k && *k == i) throw std::invalid_argument("bd_hitting_prob: need i < k");
  const auto m = static_cast<double>(j - i);
  if (m == 0.0) return 0.0;
  if (d == 0.0) return 1.0;
  const double L = std::log(d / b);
  if (!k) return L < 0.0 ? -std::expm1(m * L) : 0.0;
  const auto n = static_cast<double>(*k - i);
  if (L == 0.0) return m / n;
  if (L < 0.0) return std::expm1(m * L) / std::expm1(n * L);
  // d > b: factor out r^n to avoid overflow.
  return std::exp((m - n) * L) * std::expm1(-m * L) / std::expm1(-n * L);
}

double bd_extinction_cdf(double b, double d, std::int64_t i, double t) {
  if (!(b > 0.0) || !(d >= 0.0)) throw std::invalid_argument("bd_extinction_cdf: need b > 0, d >= 0");
  if (b == d) throw std::invalid_argument("bd_extinction_cdf: closed form requires b != d");
  if (i < 0 || t < 0.0) throw std::invalid_argument("bd_extinction_cdf: need i >= 0, t >= 0");
  if (i == 0) return 1.0;
  double base = 0.0;
  if (d < b) {
    const double x = (d - b) * t;  // <= 0
    base = d * -std::expm1(x) / (b - d * std::exp(x));
  } else {
    const double x = (d - b) * t;  // >= 0
    base = d * -std::expm1(-x) / (d - b * std::exp(-x));
  }
  return std::pow(base, static_cast<double>(i));
}

double bd_hitting_time_slope(double b, double d) {
  if (!(d > 0.0 && d < b)) throw std::invalid_argument("bd_hitting_time_slope: need 0 < d < b");
  return 1.0 / (b - d);
}

BDRecord simulate_bd(const BDRates& rates, std::int64_t z0, const BDStop& stop, Rng& rng) {
  if (z0 < 0) throw std::invalid_argument("simulate_bd: z0 must be nonnegative");
  if (rates.b < 0.0 || rates.d < 0.0 || rates.immigration < 0.0) {
    throw std::invalid_argument("simulate_bd: rates must be nonnegative");
  }
  BDRecord rec;
  std::int64_t z = z0;
  double t = 0.0;
  if (stop.track_families) rec.families = FamilyCounts({z0});
  std::size_t next_sample = 0;
  auto record_samples_until = [&](double time) {
    while (next_sample < stop.sample_times.size() && stop.sample_times[next_sample] < time) {
      rec.samples.push_back(z);
      ++next_sample;
    }
  };
  auto finish = [&](BDExit exit) {
    rec.exit = exit;
    rec.z_final = z;
    rec.t_final = t;
    // Past an absorbing stop at 0 the size is known to stay 0.
    if (exit == BDExit::lower && z == 0 && rates.immigration == 0.0) {
      record_samples_until(std::numeric_limits<double>::infinity());
    }
    return rec;
  };

  const bool logistic = rates.logistic_c.has_value();
  const double c_over_K = logistic ? *rates.logistic_c / rates.logistic_K : 0.0;
  for (;;) {
    if (stop.lower && z <= *stop.lower) return finish(BDExit::lower);
    if (stop.upper && z >= *stop.upper) return finish(BDExit::upper);
    if (rec.events >= stop.max_events) return finish(BDExit::event_cap);

    const auto n = static_cast<double>(z);
    const double birth = rates.b * n;
    const double death = (rates.d + c_over_K * n) * n;
    const double total = birth + death + rates.immigration;
    if (!(total > 0.0)) {
      record_samples_until(stop.horizon);
      t = stop.horizon;
      return finish(BDExit::horizon);
    }
    const double dt = rng.exponential(total);
    if (t + dt > stop.horizon) {
      record_samples_until(stop.horizon);
      t = stop.horizon;
      return finish(BDExit::horizon);
    }
    record_samples_until(t + dt);
    t += dt;
    ++rec.events;

    const double u = rng.uniform() * total;
    if (u < birth) {
      ++z;
      if (stop.track_families) {
        rec.families.add(rec.families.find(static_cast<std::int64_t>(rng.index(static_cast<std::uint64_t>(z - 1)))), +1);
      }
    } else if (u < birth + death) {
      if (stop.track_families) {
        rec.families.add(rec.families.find(static_cast<std::int64_t>(rng.index(static_cast<std::uint64_t>(z)))), -1);
      }
      --z;
    } else {
      ++z;
      if (stop.track_families) rec.families.append(1);
    }
  }
}

FamilyCounts gem_oracle_population(double imm_rate, double b, double d, double t, Rng& rng) {
  if (!(b > d)) throw std::invalid_argument("gem_oracle_population: need b > d");
  BDRates rates;
  rates.b = b;
  rates.d = d;
  rates.immigration = imm_rate;
  BDStop stop;
  stop.horizon = t;
  stop.lower = imm_rate > 0.0 ? std::nullopt : std::optional<std::int64_t>(0);
  stop.track_families = true;
  return simulate_bd(rates, 1, stop, rng).families;
}

std::vector<double> gem_oracle_families(double imm_rate, double b, double d, double t, Rng& rng) {
  return haplotype_spectrum(gem_oracle_population(imm_rate, b, d, t, rng));
}

CoupledPairReport coupled_bd_pair(double b1, double d1, double b2, double d2, double horizon,
                                  std::uint64_t reps, std::uint64_t seed, std::size_t samples) {
  if (b1 < 0.0 || d1 < 0.0 || b2 < 0.0 || d2 < 0.0) {
    throw std::invalid_argument("coupled_bd_pair: rates must be nonnegative");
  }
  if (samples == 0 || !(horizon > 0.0)) throw std::invalid_argument("coupled_bd_pair: need samples > 0, horizon > 0");

  CoupledPairReport report;
  report.reps = reps;
  report.times.resize(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    report.times[s] = horizon * static_cast<double>(s + 1) / static_cast<double>(samples);
  }
  const bool monotone = b1 <= b2 && d1 <= d2;
  const double b3 = b2;
  const double d3 = d1;

  std::vector<double> m12(samples, 0.0);
  std::vector<double> m31(samples, 0.0);
  std::vector<double> m32(samples, 0.0);
  const double g1 = b1 - d1;
  const double g2 = b2 - d2;
  const double g3 = b3 - d3;

  for (std::uint64_t r = 0; r < reps; ++r) {
    Rng rng(replicate_seed(seed, r));
    std::int64_t z1 = 1;
    std::int64_t z2 = 1;
    std::int64_t z3 = 1;
    double t = 0.0;
    std::size_t next = 0;
    auto accumulate = [&](std::size_t s) {
      const double ts = report.times[s];
      const double w1 = static_cast<double>(z1) * std::exp(-g1 * ts);
      const double w2 = static_cast<double>(z2) * std::exp(-g2 * ts);
      m12[s] += (w1 - w2) * (w1 - w2);
      if (monotone) {
        const double w3 = static_cast<double>(z3) * std::exp(-g3 * ts);
        m31[s] += (w3 - w1) * (w3 - w1);
        m32[s] += (w3 - w2) * (w3 - w2);
      }
    };
    for (;;) {
      // Shared measures: a birth atom at height theta is a birth for every
      // process whose birth intensity exceeds theta; likewise for deaths.
      double birth_env = std::max(b1 * static_cast<double>(z1), b2 * static_cast<double>(z2));
      double death_env = std::max(d1 * static_cast<double>(z1), d2 * static_cast<double>(z2));
      if (monotone) {
        birth_env = std::max(birth_env, b3 * static_cast<double>(z3));
        death_env = std::max(death_env, d3 * static_cast<double>(z3));
      }
      const double total = birth_env + death_env;
      const double dt = total > 0.0 ? rng.exponential(total) : std::numeric_limits<double>::infinity();
      while (next < samples && report.times[next] < t + dt) accumulate(next++);
      if (next == samples) break;
      t += dt;
      const double theta = rng.uniform() * total;
      if (theta < birth_env) {
        if (theta < b1 * static_cast<double>(z1)) ++z1;
        if (theta < b2 * static_cast<double>(z2)) ++z2;
        if (monotone && theta < b3 * static_cast<double>(z3)) ++z3;
      } else {
        const double h = theta - birth_env;
        if (h < d1 * static_cast<double>(z1)) --z1;
        if (h < d2 * static_cast<double>(z2)) --z2;
        if (monotone && h < d3 * static_cast<double>(z3)) --z3;
      }
    }
  }

  const auto n = static_cast<double>(std::max<std::uint64_t>(reps, 1));
  report.second_moment.resize(samples);
  double sup31 = 0.0;
  double sup32 = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    report.second_moment[s] = m12[s] / n;
    if (report.second_moment[s] > report.sup_second_moment) {
      report.sup_second_moment = report.second_moment[s];
      report.argsup_time = report.times[s];
    }
    sup31 = std::max(sup31, m31[s] / n);
    sup32 = std::max(sup32, m32[s] / n);
  }
  if (monotone) {
    report.sup_moment_31 = sup31;
    report.sup_moment_32 = sup32;
  }
  return report;
}

double logistic_sojourn(double b, double d, double c, double K, double eta1, double eta2,
                        double horizon, std::uint64_t reps, std::uint64_t seed,
                        std::optional<std::int64_t> start) {
  if (!(b > d) || !(c > 0.0) || !(K > 0.0)) throw std::invalid_argument("logistic_sojourn: need b > d, c > 0, K > 0");
  const double eq = (b - d) / c;
  if (!(eta1 > 0.0 && eta1 < eq) || !(eta2 > 0.0)) {
    throw std::invalid_argument("logistic_sojourn: need 0 < eta1 < (b-d)/c and eta2 > 0");
  }
  if (reps == 0) return 0.0;
  const double lo = (eq - eta1) * K;
  const double hi = (eq + eta2) * K;
  const std::int64_t z0 = start.value_or(static_cast<std::int64_t>(std::llround(eq * K)));

  BDRates rates;
  rates.b = b;
  rates.d = d;
  rates.logistic_c = c;
  rates.logistic_K = K;
  BDStop stop;
  stop.horizon = horizon;
  stop.lower = static_cast<std::int64_t>(std::ceil(lo)) - 1;
  stop.upper = static_cast<std::int64_t>(std::floor(hi)) + 1;

  std::uint64_t exits = 0;
  for (std::uint64_t r = 0; r < reps; ++r) {
    Rng rng(replicate_seed(seed, r));
    const BDRecord rec = simulate_bd(rates, z0, stop, rng);
    if (rec.exit == BDExit::lower || rec.exit == BDExit::upper) ++exits;
  }
  return static_cast<double>(exits) / static_cast<double>(reps);
}

}  // namespace softsweep
