#include "softsweep/model.hpp"

#include <cmath>
#include <stdexcept>

namespace softsweep {

std::string to_string(Allele allele) { return allele == Allele::A ? "A" : "a"; }

double CompetitionKernel::operator()(Allele on, Allele by) const {
  if (on == Allele::A) return by == Allele::A ? AA : Aa;
  return by == Allele::A ? aA : aa;
}

EcoParams EcoParams::from_growth_rates(double f_A, double rho_A, double f_a, double rho_a,
                                       const CompetitionKernel& C, double lambda_Aa,
                                       double lambda_aA, double K) {
  EcoParams params;
  params.f_A = f_A;
  params.f_a = f_a;
  params.D_A = f_A * (1.0 - lambda_Aa) - rho_A;
  params.D_a = f_a * (1.0 - lambda_aA) - rho_a;
  params.C = C;
  params.K = K;
  return params;
}

EcoParams EcoParams::swapped() const {
  EcoParams out = *this;
  out.f_A = f_a;
  out.f_a = f_A;
  out.D_A = D_a;
  out.D_a = D_A;
  out.C.AA = C.aa;
  out.C.aa = C.AA;
  out.C.Aa = C.aA;
  out.C.aA = C.Aa;
  return out;
}

void validate(const EcoParams& params) {
  auto positive = [](double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw std::invalid_argument(std::string("ecology: ") + name + " must be a positive finite number");
    }
  };
  positive(params.f_A, "f_A");
  positive(params.f_a, "f_a");
  positive(params.D_A, "D_A");
  positive(params.D_a, "D_a");
  positive(params.C.AA, "C.AA");
  positive(params.C.Aa, "C.Aa");
  positive(params.C.aA, "C.aA");
  positive(params.C.aa, "C.aa");
  positive(params.K, "K");
}

int regime_index(const MutationRegime& regime) { return static_cast<int>(regime.index()) + 1; }

double lambda_Aa(const MutationRegime& regime) {
  return std::visit([](const auto& r) { return r.lambda_Aa; }, regime);
}

double lambda_aA(const MutationRegime& regime) {
  return std::visit([](const auto& r) { return r.lambda_aA; }, regime);
}

void validate(const MutationRegime& regime) {
  if (lambda_Aa(regime) < 0.0 || lambda_aA(regime) < 0.0) {
    throw std::invalid_argument("regime: mutation constants must be nonnegative");
  }
  if (const auto* r3 = std::get_if<Regime3>(&regime)) {
    if (!(r3->beta > 0.0 && r3->beta < 1.0)) {
      throw std::invalid_argument("regime: beta must lie in (0, 1)");
    }
  }
  if (const auto* r4 = std::get_if<Regime4>(&regime)) {
    if (!(r4->lambda_Aa > 0.0 && r4->lambda_Aa < 1.0) || !(r4->lambda_aA > 0.0 && r4->lambda_aA < 1.0)) {
      throw std::invalid_argument("regime: regime-4 mutation probabilities must lie in (0, 1)");
    }
  }
}

namespace {

double checked_probability(double value, const char* direction) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::domain_error(std::string("mutation probability mu^{") + direction + "} = " +
                            std::to_string(value) + " lies outside [0, 1]");
  }
  return value;
}

double rare_default(double lambda, double K) {
  if (lambda == 0.0) return 0.0;
  const double logK = std::log(K);
  return lambda / (K * logK * logK);
}

}  // namespace

MutationProbabilities mutation_probability(const MutationRegime& regime, double K) {
  if (!(K >= 1.0)) throw std::invalid_argument("mutation_probability: K must be >= 1");
  MutationProbabilities mu;
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Regime1>) {
          mu.Aa = r.rate_Aa ? r.rate_Aa(K) : rare_default(r.lambda_Aa, K);
          mu.aA = r.rate_aA ? r.rate_aA(K) : rare_default(r.lambda_aA, K);
        } else if constexpr (std::is_same_v<T, Regime2>) {
          mu.Aa = r.lambda_Aa / K;
          mu.aA = r.lambda_aA / K;
        } else if constexpr (std::is_same_v<T, Regime3>) {
          const double scale = std::pow(K, r.beta - 1.0);
          mu.Aa = r.lambda_Aa * scale;
          mu.aA = r.lambda_aA * scale;
        } else {
          mu.Aa = r.lambda_Aa;
          mu.aA = r.lambda_aA;
        }
      },
      regime);
  checked_probability(mu.Aa, "Aa");
  checked_probability(mu.aA, "aA");
  return mu;
}

double equilibrium_density(const EcoParams& params, Allele allele) {
  return (params.fertility(allele) - params.death(allele)) / params.C(allele, allele);
}

double invasion_fitness(const EcoParams& params, Allele allele) {
  const Allele resident = other(allele);
  return params.fertility(allele) - params.death(allele) -
         params.C(allele, resident) * equilibrium_density(params, resident);
}

SweepConditionReport validate_sweep_conditions(const EcoParams& params) {
  SweepConditionReport report;
  const double nbar_A = equilibrium_density(params, Allele::A);
  const double nbar_a = equilibrium_density(params, Allele::a);
  const double S_aA = invasion_fitness(params, Allele::a);
  const double S_Aa = invasion_fitness(params, Allele::A);
  if (!(nbar_A > 0.0)) report.failures.push_back("nbar_A = " + std::to_string(nbar_A) + " is not positive");
  if (!(nbar_a > 0.0)) report.failures.push_back("nbar_a = " + std::to_string(nbar_a) + " is not positive");
  if (!(S_Aa < 0.0)) report.failures.push_back("S_Aa = " + std::to_string(S_Aa) + " is not negative");
  if (!(S_aA > 0.0)) report.failures.push_back("S_aA = " + std::to_string(S_aA) + " is not positive");
  report.ok = report.failures.empty();
  return report;
}

GemTheta gem_theta(const EcoParams& params, const MutationRegime& regime) {
  const auto* r2 = std::get_if<Regime2>(&regime);
  if (r2 == nullptr) {
    throw std::invalid_argument("gem_theta: defined for mutation regime 2 only (got regime " +
                                std::to_string(regime_index(regime)) + ")");
  }
  const double scale = params.f_A * equilibrium_density(params, Allele::A) / params.f_a;
  GemTheta out;
  out.theta = scale * r2->lambda_Aa;
  out.theta_aA = scale * r2->lambda_aA;
  out.ewens_theta = 2.0 * out.theta;
  return out;
}

DerivedQuantities derive(const EcoParams& params, const MutationRegime& regime) {
  DerivedQuantities q;
  q.nbar_A = equilibrium_density(params, Allele::A);
  q.nbar_a = equilibrium_density(params, Allele::a);
  q.S_aA = invasion_fitness(params, Allele::a);
  q.S_Aa = invasion_fitness(params, Allele::A);
  q.s = q.S_aA / params.f_a;
  if (const auto* r4 = std::get_if<Regime4>(&regime)) {
    q.rho_A = params.f_A * (1.0 - r4->lambda_Aa) - params.D_A;
    q.rho_a = params.f_a * (1.0 - r4->lambda_aA) - params.D_a;
  }
  if (std::holds_alternative<Regime2>(regime)) q.theta = gem_theta(params, regime).theta;
  return q;
}

}  // namespace softsweep
