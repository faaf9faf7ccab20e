#ifndef SOFTSWEEP_GEM_HPP
#define SOFTSWEEP_GEM_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "softsweep/model.hpp"
#include "softsweep/rng.hpp"

namespace softsweep {

struct GEMSample {
  std::vector<double> weights;  // P_1, P_2, ... in stick order
  double residual = 1.0;        // 1 - sum(weights)
};

inline constexpr std::size_t kMaxSticks = 100'000;

/// Stick-breaking draw with B_i ~ Beta(1, theta) sampled by inversion,
/// B = 1 - U^{1/theta}. Stops once the residual mass drops below tail_tol
/// or after kMaxSticks sticks.
GEMSample gem_sample(double theta, Rng& rng, double tail_tol = 1e-12);

/// Candidate limits for the probability that two mutants share an origin.
struct IdentityPrediction {
  double gem = 1.0;        // E[sum P_i^2] = 1 / (1 + theta) under GEM(theta)
  double corollary = 1.0;  // 1 / (1 + 2 theta), as the identity-by-descent corollary states
};

IdentityPrediction gem_identity_prob(double theta);

/// Limit of the identity probability for the given scaling: 1 for rare
/// mutations, the two GEM candidates for scaling 2, 0 for scaling 3.
/// Throws for Regime4, which has no sweep limit.
IdentityPrediction predicted_identity(const EcoParams& params, const MutationRegime& regime);

struct SpectrumSummary {
  std::size_t count = 0;
  double mean_first = 0.0;
  double se_first = 0.0;
  double mean_largest = 0.0;
  double se_largest = 0.0;
  double mean_identity = 0.0;  // sum p_i^2
  double se_identity = 0.0;
  double mean_families = 0.0;
  std::vector<double> first_sorted;  // empirical CDF support of P_1
  std::vector<double> mean_ranked;   // mean k-th largest fraction, k = 1..
  std::vector<double> mean_aged;     // mean k-th oldest fraction, k = 1..

  /// Empirical CDF of the first-family fraction at x.
  double first_cdf(double x) const;
};

/// Throws std::invalid_argument for empty input or a spectrum whose entries
/// do not sum to 1 (tolerance 1e-9). Empty spectra (no mutants) are skipped.
SpectrumSummary spectrum_summary(const std::vector<std::vector<double>>& spectra,
                                 std::size_t ranks = 10);

}  // namespace softsweep

#endif  // SOFTSWEEP_GEM_HPP
