#ifndef SOFTSWEEP_MODEL_HPP
#define SOFTSWEEP_MODEL_HPP

// Ecological and mutational parameters of the two-allele birth-death model,
// plus the closed-form quantities derived from them.

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace softsweep {

enum class Allele { A, a };

constexpr Allele other(Allele allele) { return allele == Allele::A ? Allele::a : Allele::A; }
std::string to_string(Allele allele);

/// Competition kernel C(alpha, alpha'): impact of an alpha' individual on an
/// alpha individual, per unit of population density.
struct CompetitionKernel {
  double AA = 1.0;
  double Aa = 1.0;
  double aA = 1.0;
  double aa = 1.0;

  double operator()(Allele on, Allele by) const;
  double determinant() const { return AA * aa - Aa * aA; }
};

struct EcoParams {
  double f_A = 1.0;
  double f_a = 1.0;
  double D_A = 0.0;
  double D_a = 0.0;
  CompetitionKernel C;
  double K = 1.0;

  double fertility(Allele allele) const { return allele == Allele::A ? f_A : f_a; }
  double death(Allele allele) const { return allele == Allele::A ? D_A : D_a; }

  /// Builds parameters from fertilities and mutation-discounted growth rates
  /// rho_alpha = f_alpha (1 - lambda^{alpha,other}) - D_alpha.
  static EcoParams from_growth_rates(double f_A, double rho_A, double f_a, double rho_a,
                                     const CompetitionKernel& C, double lambda_Aa,
                                     double lambda_aA, double K = 1.0);

  /// Parameters with the roles of A and a exchanged.
  EcoParams swapped() const;
};

/// Throws std::invalid_argument unless all rates and kernel entries are
/// strictly positive (and K > 0).
void validate(const EcoParams& params);

// Mutation-probability scalings. Each yields per-birth probabilities
// mu^{Aa} (A parent, a child) and mu^{aA} (a parent, A child).

/// Rare mutations: mu_K = lambda / (K (log K)^2) unless a custom rate is given.
struct Regime1 {
  double lambda_Aa = 0.0;
  double lambda_aA = 0.0;
  std::function<double(double)> rate_Aa;  // optional override, K -> mu^{Aa}
  std::function<double(double)> rate_aA;  // optional override, K -> mu^{aA}
};

/// mu_K = lambda / K.
struct Regime2 {
  double lambda_Aa = 0.0;
  double lambda_aA = 0.0;
};

/// mu_K = lambda K^{beta - 1}, 0 < beta < 1.
struct Regime3 {
  double lambda_Aa = 0.0;
  double lambda_aA = 0.0;
  double beta = 0.5;
};

/// mu_K = lambda, constant in K, 0 < lambda < 1.
struct Regime4 {
  double lambda_Aa = 0.0;
  double lambda_aA = 0.0;
};

using MutationRegime = std::variant<Regime1, Regime2, Regime3, Regime4>;

int regime_index(const MutationRegime& regime);
double lambda_Aa(const MutationRegime& regime);
double lambda_aA(const MutationRegime& regime);
void validate(const MutationRegime& regime);

struct MutationProbabilities {
  double Aa = 0.0;
  double aA = 0.0;
};

/// Per-birth mutation probabilities at carrying capacity K >= 1. Throws
/// std::domain_error when a computed value falls outside [0, 1].
MutationProbabilities mutation_probability(const MutationRegime& regime, double K);

/// n̄_alpha = (f_alpha - D_alpha) / C(alpha, alpha). May be <= 0.
double equilibrium_density(const EcoParams& params, Allele allele);

/// S_{alpha, other} = f_alpha - D_alpha - C(alpha, other) n̄_other.
double invasion_fitness(const EcoParams& params, Allele allele);

struct SweepConditionReport {
  bool ok = false;
  std::vector<std::string> failures;
};

SweepConditionReport validate_sweep_conditions(const EcoParams& params);

/// GEM parameter of the haplotype spectrum (mutation scaling 2 only).
struct GemTheta {
  double theta = 0.0;        // f_A n̄_A lambda^{Aa} / f_a, the value used throughout
  double theta_aA = 0.0;     // same expression with lambda^{aA}, reported for comparison
  double ewens_theta = 0.0;  // 2 * theta
};

/// Throws std::invalid_argument unless the regime is Regime2.
GemTheta gem_theta(const EcoParams& params, const MutationRegime& regime);

struct DerivedQuantities {
  double nbar_A = 0.0;
  double nbar_a = 0.0;
  double S_aA = 0.0;
  double S_Aa = 0.0;
  std::optional<double> rho_A;  // Regime4 only
  std::optional<double> rho_a;
  double s = 0.0;               // S_aA / f_a
  std::optional<double> theta;  // Regime2 only
};

DerivedQuantities derive(const EcoParams& params, const MutationRegime& regime);

}  // namespace softsweep

#endif  // SOFTSWEEP_MODEL_HPP
