#ifndef SOFTSWEEP_ODE_HPP
#define SOFTSWEEP_ODE_HPP

// Deterministic analysis of the competitive Lotka-Volterra system and its
// extension with order-one mutation probabilities.

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "softsweep/model.hpp"

namespace softsweep {

/// A point (n_A, n_a) of the density plane.
using Vec2 = std::array<double, 2>;

struct Mat2 {
  double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;
  double trace() const { return a11 + a22; }
  double det() const { return a11 * a22 - a12 * a21; }
};

/// Per-birth mutation probabilities of the deterministic system.
struct MutationRates {
  double Aa = 0.0;
  double aA = 0.0;
};

Vec2 lv_rhs(const EcoParams& params, const Vec2& n);
Vec2 mut_rhs(const EcoParams& params, const MutationRates& lambda, const Vec2& n);

/// rho_alpha = f_alpha (1 - lambda^{alpha, other}) - D_alpha.
double growth_rate(const EcoParams& params, const MutationRates& lambda, Allele allele);

// ---------------------------------------------------------------------------
// Integration

using Rhs = std::function<Vec2(const Vec2&)>;

struct IntegratorOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  double h_initial = 0.0;  // 0 selects a starting step automatically
  double h_min = 1e-14;
  double h_max = 0.0;      // 0 means unbounded
  std::size_t max_steps = 50'000'000;
  bool reject_negative = true;
};

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double t, const Vec2& y)
      : std::runtime_error(what), t_(t), y_(y) {}
  double t() const { return t_; }
  const Vec2& y() const { return y_; }

 private:
  double t_;
  Vec2 y_;
};

/// Dense solution assembled from accepted Dormand-Prince 5(4) steps, each
/// carrying its fourth-order continuous extension.
class Solution {
 public:
  struct Step {
    double t0 = 0.0;
    double h = 0.0;
    std::array<Vec2, 5> coeff{};
  };

  double t_begin() const { return steps_.empty() ? t_begin_ : steps_.front().t0; }
  double t_end() const { return steps_.empty() ? t_begin_ : steps_.back().t0 + steps_.back().h; }
  const std::vector<Step>& steps() const { return steps_; }
  std::size_t rejected() const { return rejected_; }

  Vec2 operator()(double t) const;
  /// Time derivative of the continuous extension.
  Vec2 derivative(double t) const;

 private:
  friend Solution integrate(const Rhs& rhs, const Vec2& n0, double t_end, const IntegratorOptions& options);
  const Step& locate(double t) const;

  double t_begin_ = 0.0;
  Vec2 y_begin_{};
  std::vector<Step> steps_;
  std::size_t rejected_ = 0;
};

/// Adaptive explicit integration from t = 0 to t_end. Steps whose endpoint
/// has a negative coordinate are rejected and retried with half the step.
/// Throws IntegrationError on step-size underflow or step-count exhaustion.
Solution integrate(const Rhs& rhs, const Vec2& n0, double t_end, const IntegratorOptions& options = {});

struct Trajectory {
  std::vector<double> t;
  std::vector<Vec2> n;
};

Trajectory integrate(const Rhs& rhs, const Vec2& n0, const std::vector<double>& sample_times,
                     const IntegratorOptions& options = {});

// ---------------------------------------------------------------------------
// Fixed points

/// Coefficients of the depressed cubic z^3 + p z + q = 0 in the ratio
/// rho = n_a / n_A of an interior fixed point, with rho = z - r.
struct CubicData {
  double p = 0.0;
  double q = 0.0;
  double r = 0.0;
  double delta = 0.0;  // -(4 p^3 + 27 q^2)
  /// c3 rho^3 + c2 rho^2 + c1 rho + c0.
  std::array<double, 4> poly{};
};

/// Throws std::domain_error when f_a lambda^{aA} C_aa = 0.
CubicData cubic_coefficients(const EcoParams& params, const MutationRates& lambda);

enum class CubicBranch { one_real, double_root, three_real };
std::string to_string(CubicBranch branch);

struct CubicRoots {
  CubicBranch branch = CubicBranch::one_real;
  std::vector<double> roots;  // real roots rho
  bool degenerate = false;    // p = 0 at delta = 0: triple root
};

/// Closed-form roots: Cardano for delta < 0, the double-root formulas for
/// delta = 0 (within 1e-12 max(|4p^3|, |27q^2|)), the trigonometric form for
/// delta > 0.
CubicRoots cubic_roots(const CubicData& cubic);

enum class FixedPointKind { sink, source, saddle, saddle_node, degenerate };
std::string to_string(FixedPointKind kind);

struct Classification {
  FixedPointKind kind = FixedPointKind::degenerate;
  std::optional<int> index;
};

using Eigenpair = std::array<std::complex<double>, 2>;

Eigenpair eigenvalues(const Mat2& m);

/// tol_0 = 1e-7 (1 + |trace|).
Classification classify(const Eigenpair& eig, double trace);

struct FixedPointReport {
  Vec2 n{};
  std::optional<double> rho;
  Mat2 jacobian;
  Eigenpair eigen{};
  FixedPointKind kind = FixedPointKind::degenerate;
  std::optional<int> index;
  double residual = 0.0;        // max |rhs| after polishing
  double cubic_residual = 0.0;  // relative cubic residual of the closed-form root
  bool degenerate_root = false;
};

/// Full Jacobian of the mutation system at n.
Mat2 jacobian(const EcoParams& params, const MutationRates& lambda, const Vec2& n);
/// Equivalent form valid at interior fixed points (n > 0).
Mat2 jacobian_interior(const EcoParams& params, const MutationRates& lambda, const Vec2& n);

FixedPointReport make_report(const EcoParams& params, const MutationRates& lambda, const Vec2& n);

/// Interior fixed points sorted by n_A. Falls back to the reduced
/// polynomial when lambda^{aA} = 0.
std::vector<FixedPointReport> interior_fixed_points(const EcoParams& params, const MutationRates& lambda);

FixedPointReport origin_report(const EcoParams& params, const MutationRates& lambda);

struct IndexSum {
  int sum = 0;
  bool determinate = true;
};

IndexSum index_sum(const std::vector<FixedPointReport>& reports);

// ---------------------------------------------------------------------------
// Sufficient conditions

struct Bracket {
  Allele allele = Allele::A;
  double lower = 0.0;  // rho_alpha / C(alpha, alpha)
  double upper = 0.0;  // f_other lambda^{other, alpha} / C(alpha, other)
};

struct ConditionReport {
  double rho_A = 0.0;
  double rho_a = 0.0;
  bool determinant_condition = false;  // C_aa C_AA > C_Aa C_aA
  double delta_A = 0.0;                // f_a lambda^{aA} - rho_A C_Aa / C_AA
  double delta_a = 0.0;                // f_A lambda^{Aa} - rho_a C_aA / C_aa
  double n_star_A = 0.0;
  double n_star_a = 0.0;
  double S_tilde_Aa = 0.0;             // rho_A - (C_Aa / C_aa) rho_a
  double S_tilde_aA = 0.0;             // rho_a - (C_aA / C_AA) rho_A
  bool assumption_A = false;           // C_Aa rho_A < C_AA f_a lambda^{aA}
  bool assumption_C = false;           // C_aA rho_a < C_aa f_A lambda^{Aa}
  bool unique_sink_guaranteed = false;
  std::vector<Bracket> brackets;

  /// Mismatches between the guarantees above and computed fixed points.
  std::vector<std::string> verify(const std::vector<FixedPointReport>& points) const;
};

ConditionReport check_conditions(const EcoParams& params, const MutationRates& lambda);

// ---------------------------------------------------------------------------
// Small-mutation expansion of the stable equilibrium, with lambda^{Aa} = p
// lambda and lambda^{aA} = lambda.

enum class ExpansionClause { mutant_fixation, coexistence };

struct PerturbationExpansion {
  ExpansionClause clause = ExpansionClause::mutant_fixation;
  Vec2 zeroth{};
  Vec2 first_order{};          // d n / d lambda at lambda = 0
  Vec2 printed_first_order{};  // coefficients as printed for the fixation clause

  Vec2 at(double lambda) const {
    return {zeroth[0] + lambda * first_order[0], zeroth[1] + lambda * first_order[1]};
  }
};

/// Throws std::invalid_argument unless f > D for both alleles and one of
/// S_aA > 0 > S_Aa or S_aA, S_Aa > 0 holds.
PerturbationExpansion perturbation_equilibrium(const EcoParams& params, double p);

/// Two-species Lotka-Volterra coexistence equilibrium.
Vec2 coexistence_equilibrium(const EcoParams& params);

// ---------------------------------------------------------------------------

struct EntryTime {
  double time = 0.0;
  double horizon = 0.0;  // containment verified on [time, horizon] only
};

/// First time after which the Lotka-Volterra solution from z stays in
/// [0, eps^2/2] x [n̄_a - eps/2, inf) up to `horizon`. Throws
/// std::runtime_error if the trajectory is outside the box at the horizon.
EntryTime entry_time(const EcoParams& params, const Vec2& z, double eps, double horizon = 1e3,
                     const IntegratorOptions& options = {});

}  // namespace softsweep

#endif  // SOFTSWEEP_ODE_HPP
