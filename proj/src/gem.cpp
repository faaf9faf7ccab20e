#include "softsweep/gem.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace softsweep {

GEMSample gem_sample(double theta, Rng& rng, double tail_tol) {
  if (!(theta > 0.0)) throw std::invalid_argument("gem_sample: theta must be positive");
  if (!(tail_tol > 0.0 && tail_tol < 1.0)) throw std::invalid_argument("gem_sample: tail_tol must lie in (0, 1)");
  GEMSample sample;
  double remaining = 1.0;
  while (remaining >= tail_tol && sample.weights.size() < kMaxSticks) {
    // 1 - U^{1/theta}, written to keep precision when U^{1/theta} is near 1.
    const double B = -std::expm1(std::log(rng.uniform()) / theta);
    const double w = B * remaining;
    sample.weights.push_back(w);
    remaining -= w;
  }
  sample.residual = remaining;
  return sample;
}

IdentityPrediction gem_identity_prob(double theta) {
  if (!(theta >= 0.0)) throw std::invalid_argument("gem_identity_prob: theta must be nonnegative");
  return {1.0 / (1.0 + theta), 1.0 / (1.0 + 2.0 * theta)};
}

IdentityPrediction predicted_identity(const EcoParams& params, const MutationRegime& regime) {
  switch (regime_index(regime)) {
    case 1: return {1.0, 1.0};
    case 2: return gem_identity_prob(gem_theta(params, regime).theta);
    case 3: return {0.0, 0.0};
    default: throw std::invalid_argument("predicted_identity: no sweep limit for regime 4");
  }
}

double SpectrumSummary::first_cdf(double x) const {
  if (first_sorted.empty()) return 0.0;
  const auto it = std::upper_bound(first_sorted.begin(), first_sorted.end(), x);
  return static_cast<double>(it - first_sorted.begin()) / static_cast<double>(first_sorted.size());
}

namespace {

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
  void add(double x) {
    sum += x;
    sum_sq += x * x;
  }
  double mean(double n) const { return sum / n; }
  double se(double n) const {
    if (n < 2.0) return 0.0;
    const double m = sum / n;
    const double var = std::max(0.0, (sum_sq - n * m * m) / (n - 1.0));
    return std::sqrt(var / n);
  }
};

}  // namespace

SpectrumSummary spectrum_summary(const std::vector<std::vector<double>>& spectra, std::size_t ranks) {
  SpectrumSummary out;
  Moments first, largest, identity, families;
  std::vector<double> ranked_sum(ranks, 0.0);
  std::vector<double> aged_sum(ranks, 0.0);
  for (const auto& spectrum : spectra) {
    if (spectrum.empty()) continue;
    double total = 0.0;
    double sq = 0.0;
    for (const double p : spectrum) {
      total += p;
      sq += p * p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("spectrum_summary: spectrum does not sum to 1");
    ++out.count;
    first.add(spectrum.front());
    largest.add(*std::max_element(spectrum.begin(), spectrum.end()));
    identity.add(sq);
    families.add(static_cast<double>(spectrum.size()));
    out.first_sorted.push_back(spectrum.front());
    std::vector<double> sorted = spectrum;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    for (std::size_t k = 0; k < ranks && k < spectrum.size(); ++k) {
      ranked_sum[k] += sorted[k];
      aged_sum[k] += spectrum[k];
    }
  }
  if (out.count == 0) throw std::invalid_argument("spectrum_summary: no nonempty spectra");
  const auto n = static_cast<double>(out.count);
  out.mean_first = first.mean(n);
  out.se_first = first.se(n);
  out.mean_largest = largest.mean(n);
  out.se_largest = largest.se(n);
  out.mean_identity = identity.mean(n);
  out.se_identity = identity.se(n);
  out.mean_families = families.mean(n);
  std::sort(out.first_sorted.begin(), out.first_sorted.end());
  out.mean_ranked.resize(ranks);
  out.mean_aged.resize(ranks);
  for (std::size_t k = 0; k < ranks; ++k) {
    out.mean_ranked[k] = ranked_sum[k] / n;
    out.mean_aged[k] = aged_sum[k] / n;
  }
  return out;
}

}  // namespace softsweep
