#include <algorithm>
#include <cmath>
#include <numbers>

#include "softsweep/ode.hpp"

namespace softsweep {

Vec2 lv_rhs(const EcoParams& p, const Vec2& n) {
  const auto& C = p.C;
  return {(p.f_A - p.D_A - C.AA * n[0] - C.Aa * n[1]) * n[0],
          (p.f_a - p.D_a - C.aA * n[0] - C.aa * n[1]) * n[1]};
}

Vec2 mut_rhs(const EcoParams& p, const MutationRates& lambda, const Vec2& n) {
  const auto& C = p.C;
  return {(p.f_A * (1.0 - lambda.Aa) - p.D_A - C.AA * n[0] - C.Aa * n[1]) * n[0] + p.f_a * lambda.aA * n[1],
          (p.f_a * (1.0 - lambda.aA) - p.D_a - C.aA * n[0] - C.aa * n[1]) * n[1] + p.f_A * lambda.Aa * n[0]};
}

double growth_rate(const EcoParams& p, const MutationRates& lambda, Allele allele) {
  return allele == Allele::A ? p.f_A * (1.0 - lambda.Aa) - p.D_A : p.f_a * (1.0 - lambda.aA) - p.D_a;
}

std::string to_string(CubicBranch branch) {
  switch (branch) {
    case CubicBranch::one_real: return "one_real";
    case CubicBranch::double_root: return "double_root";
    case CubicBranch::three_real: return "three_real";
  }
  return "unknown";
}

std::string to_string(FixedPointKind kind) {
  switch (kind) {
    case FixedPointKind::sink: return "sink";
    case FixedPointKind::source: return "source";
    case FixedPointKind::saddle: return "saddle";
    case FixedPointKind::saddle_node: return "saddle-node";
    case FixedPointKind::degenerate: return "degenerate";
  }
  return "unknown";
}

namespace {

// Polynomial in rho obtained by eliminating n_A from the fixed-point equations.
std::array<double, 4> ratio_polynomial(const EcoParams& p, const MutationRates& lambda) {
  const auto& C = p.C;
  const double rho_A = growth_rate(p, lambda, Allele::A);
  const double rho_a = growth_rate(p, lambda, Allele::a);
  const double m = p.f_a * lambda.aA;
  const double l = p.f_A * lambda.Aa;
  return {-l * C.AA, rho_A * C.aA - rho_a * C.AA - l * C.Aa, m * C.aA + rho_A * C.aa - rho_a * C.Aa,
          m * C.aa};
}

double poly_eval(const std::array<double, 4>& c, double x) {
  return ((c[3] * x + c[2]) * x + c[1]) * x + c[0];
}

double poly_relative_residual(const std::array<double, 4>& c, double x) {
  const double scale = std::abs(c[3] * x * x * x) + std::abs(c[2] * x * x) + std::abs(c[1] * x) + std::abs(c[0]);
  return scale > 0.0 ? std::abs(poly_eval(c, x)) / scale : 0.0;
}

double max_abs(const Vec2& v) { return std::max(std::abs(v[0]), std::abs(v[1])); }

Vec2 polish(const EcoParams& p, const MutationRates& lambda, Vec2 n) {
  Vec2 F = mut_rhs(p, lambda, n);
  for (int iter = 0; iter < 50 && max_abs(F) > 0.0; ++iter) {
    const Mat2 J = jacobian(p, lambda, n);
    const double det = J.det();
    if (det == 0.0) break;
    const Vec2 dn{(J.a22 * F[0] - J.a12 * F[1]) / det, (-J.a21 * F[0] + J.a11 * F[1]) / det};
    double damping = 1.0;
    bool improved = false;
    for (int halving = 0; halving < 30; ++halving) {
      const Vec2 trial{n[0] - damping * dn[0], n[1] - damping * dn[1]};
      const Vec2 Ft = mut_rhs(p, lambda, trial);
      if (max_abs(Ft) < max_abs(F)) {
        n = trial;
        F = Ft;
        improved = true;
        break;
      }
      damping *= 0.5;
    }
    if (!improved) break;
  }
  return n;
}

}  // namespace

CubicData cubic_coefficients(const EcoParams& p, const MutationRates& lambda) {
  const double a3 = p.f_a * lambda.aA * p.C.aa;
  if (a3 == 0.0) throw std::domain_error("cubic_coefficients: f_a lambda^{aA} C_aa is zero");
  CubicData cubic;
  cubic.poly = ratio_polynomial(p, lambda);
  const double B = cubic.poly[2] / a3;  // rho^2 coefficient of the monic cubic
  const double Cm = cubic.poly[1] / a3;
  const double Dm = cubic.poly[0] / a3;
  cubic.p = Cm - B * B / 3.0;
  cubic.q = B / 27.0 * (2.0 * B * B - 9.0 * Cm) + Dm;
  cubic.r = B / 3.0;
  cubic.delta = -(4.0 * cubic.p * cubic.p * cubic.p + 27.0 * cubic.q * cubic.q);
  return cubic;
}

CubicRoots cubic_roots(const CubicData& c) {
  CubicRoots out;
  const double band = 1e-12 * std::max(std::abs(4.0 * c.p * c.p * c.p), std::abs(27.0 * c.q * c.q));
  // The depressed variable is z = rho + r.
  if (std::abs(c.delta) <= band) {
    out.branch = CubicBranch::double_root;
    if (c.p == 0.0) {
      out.degenerate = true;
      out.roots = {-c.r};
    } else {
      out.roots = {3.0 * c.q / c.p - c.r, -3.0 * c.q / (2.0 * c.p) - c.r};
    }
  } else if (c.delta < 0.0) {
    out.branch = CubicBranch::one_real;
    const double s = std::sqrt(-c.delta / 27.0);
    out.roots = {std::cbrt((-c.q - s) / 2.0) + std::cbrt((-c.q + s) / 2.0) - c.r};
  } else {
    out.branch = CubicBranch::three_real;
    const double amp = 2.0 * std::sqrt(-c.p / 3.0);
    const double arg = std::clamp(-c.q / 2.0 * std::sqrt(27.0 / (-c.p * c.p * c.p)), -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    for (int i = 0; i < 3; ++i) {
      out.roots.push_back(amp * std::cos(phi + 2.0 * i * std::numbers::pi / 3.0) - c.r);
    }
  }
  return out;
}

Eigenpair eigenvalues(const Mat2& m) {
  const double half_tr = 0.5 * m.trace();
  const double det = m.det();
  const double disc = half_tr * half_tr - det;
  if (disc >= 0.0) {
    const double root = std::sqrt(disc);
    const double big = half_tr >= 0.0 ? half_tr + root : half_tr - root;
    const double small = big != 0.0 ? det / big : 0.0;
    return {std::complex<double>(big, 0.0), std::complex<double>(small, 0.0)};
  }
  const double im = std::sqrt(-disc);
  return {std::complex<double>(half_tr, im), std::complex<double>(half_tr, -im)};
}

Classification classify(const Eigenpair& eig, double trace) {
  const double tol = 1e-7 * (1.0 + std::abs(trace));
  const bool zero0 = std::abs(eig[0]) < tol;
  const bool zero1 = std::abs(eig[1]) < tol;
  if (zero0 && zero1) return {FixedPointKind::degenerate, std::nullopt};
  if (zero0 || zero1) return {FixedPointKind::saddle_node, 0};
  const double r0 = eig[0].real();
  const double r1 = eig[1].real();
  if (r0 < -tol && r1 < -tol) return {FixedPointKind::sink, 1};
  if (r0 > tol && r1 > tol) return {FixedPointKind::source, 1};
  if ((r0 < -tol && r1 > tol) || (r0 > tol && r1 < -tol)) return {FixedPointKind::saddle, -1};
  return {FixedPointKind::degenerate, std::nullopt};
}

Mat2 jacobian(const EcoParams& p, const MutationRates& lambda, const Vec2& n) {
  const auto& C = p.C;
  const double rho_A = growth_rate(p, lambda, Allele::A);
  const double rho_a = growth_rate(p, lambda, Allele::a);
  Mat2 J;
  J.a11 = rho_A - 2.0 * C.AA * n[0] - C.Aa * n[1];
  J.a12 = -C.Aa * n[0] + p.f_a * lambda.aA;
  J.a21 = -C.aA * n[1] + p.f_A * lambda.Aa;
  J.a22 = rho_a - 2.0 * C.aa * n[1] - C.aA * n[0];
  return J;
}

Mat2 jacobian_interior(const EcoParams& p, const MutationRates& lambda, const Vec2& n) {
  const auto& C = p.C;
  Mat2 J;
  J.a11 = -C.AA * n[0] - p.f_a * lambda.aA * n[1] / n[0];
  J.a12 = -C.Aa * n[0] + p.f_a * lambda.aA;
  J.a21 = -C.aA * n[1] + p.f_A * lambda.Aa;
  J.a22 = -C.aa * n[1] - p.f_A * lambda.Aa * n[0] / n[1];
  return J;
}

FixedPointReport make_report(const EcoParams& p, const MutationRates& lambda, const Vec2& n) {
  FixedPointReport rep;
  rep.n = n;
  rep.jacobian = jacobian(p, lambda, n);
  rep.eigen = eigenvalues(rep.jacobian);
  const Classification cls = classify(rep.eigen, rep.jacobian.trace());
  rep.kind = cls.kind;
  rep.index = cls.index;
  rep.residual = max_abs(mut_rhs(p, lambda, n));
  if (n[0] > 0.0) rep.rho = n[1] / n[0];
  return rep;
}

std::vector<FixedPointReport> interior_fixed_points(const EcoParams& p, const MutationRates& lambda) {
  const auto& C = p.C;
  const double rho_A = growth_rate(p, lambda, Allele::A);
  const double m = p.f_a * lambda.aA;

  std::vector<double> candidates;
  bool degenerate = false;
  const std::array<double, 4> poly = ratio_polynomial(p, lambda);
  if (m * C.aa != 0.0) {
    const CubicRoots roots = cubic_roots(cubic_coefficients(p, lambda));
    candidates = roots.roots;
    degenerate = roots.degenerate;
  } else if (poly[2] != 0.0) {
    // lambda^{aA} = 0: quadratic in rho (linear when lambda^{Aa} = 0 too,
    // the rho = 0 root then lies on the boundary).
    const double a = poly[2], b = poly[1], c = poly[0];
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
      if (q != 0.0) candidates.push_back(q / a);
      if (q != 0.0) candidates.push_back(c / q);
    }
  } else if (poly[1] != 0.0) {
    candidates.push_back(-poly[0] / poly[1]);
  }

  std::vector<FixedPointReport> out;
  for (const double rho : candidates) {
    if (!(rho > 0.0)) continue;
    const double nA = (rho_A + m * rho) / (C.AA + C.Aa * rho);
    if (!(nA > 0.0)) continue;
    const Vec2 polished = polish(p, lambda, {nA, rho * nA});
    FixedPointReport rep = make_report(p, lambda, polished);
    rep.rho = rho;
    rep.cubic_residual = poly_relative_residual(poly, rho);
    rep.degenerate_root = degenerate;
    const bool duplicate = std::any_of(out.begin(), out.end(), [&](const FixedPointReport& q) {
      return std::abs(q.n[0] - rep.n[0]) <= 1e-8 * std::max(std::abs(q.n[0]), 1.0) &&
             std::abs(q.n[1] - rep.n[1]) <= 1e-8 * std::max(std::abs(q.n[1]), 1.0);
    });
    if (!duplicate) out.push_back(rep);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.n[0] < b.n[0]; });
  return out;
}

FixedPointReport origin_report(const EcoParams& p, const MutationRates& lambda) {
  return make_report(p, lambda, {0.0, 0.0});
}

IndexSum index_sum(const std::vector<FixedPointReport>& reports) {
  IndexSum out;
  for (const auto& r : reports) {
    if (!r.index) {
      out.determinate = false;
      continue;
    }
    out.sum += *r.index;
  }
  return out;
}

ConditionReport check_conditions(const EcoParams& p, const MutationRates& lambda) {
  const auto& C = p.C;
  ConditionReport rep;
  rep.rho_A = growth_rate(p, lambda, Allele::A);
  rep.rho_a = growth_rate(p, lambda, Allele::a);
  const double m = p.f_a * lambda.aA;  // a-to-A mutant births per a individual
  const double l = p.f_A * lambda.Aa;
  rep.determinant_condition = C.aa * C.AA > C.Aa * C.aA;
  rep.delta_A = m - rep.rho_A / C.AA * C.Aa;
  rep.delta_a = l - rep.rho_a / C.aa * C.aA;
  rep.n_star_A = rep.rho_A / C.AA;
  rep.n_star_a = rep.rho_a / C.aa;
  rep.S_tilde_Aa = rep.rho_A - C.Aa / C.aa * rep.rho_a;
  rep.S_tilde_aA = rep.rho_a - C.aA / C.AA * rep.rho_A;
  rep.assumption_A = C.Aa * rep.rho_A < C.AA * m;
  rep.assumption_C = C.aA * rep.rho_a < C.aa * l;
  if (rep.delta_A > 0.0) rep.brackets.push_back({Allele::A, rep.n_star_A, m / C.Aa});
  if (rep.delta_a > 0.0) rep.brackets.push_back({Allele::a, rep.n_star_a, l / C.aA});
  rep.unique_sink_guaranteed = rep.determinant_condition || !rep.brackets.empty();
  return rep;
}

std::vector<std::string> ConditionReport::verify(const std::vector<FixedPointReport>& points) const {
  std::vector<std::string> issues;
  if (!unique_sink_guaranteed) return issues;
  if (points.size() != 1) {
    issues.push_back("expected a unique interior fixed point, found " + std::to_string(points.size()));
    return issues;
  }
  if (points.front().kind != FixedPointKind::sink) issues.push_back("unique interior fixed point is not a sink");
  for (const auto& b : brackets) {
    const double v = b.allele == Allele::A ? points.front().n[0] : points.front().n[1];
    if (!(v > b.lower && v < b.upper)) {
      issues.push_back("n_" + to_string(b.allele) + " = " + std::to_string(v) + " outside (" +
                       std::to_string(b.lower) + ", " + std::to_string(b.upper) + ")");
    }
  }
  return issues;
}

Vec2 coexistence_equilibrium(const EcoParams& p) {
  const auto& C = p.C;
  const double gA = p.f_A - p.D_A;
  const double ga = p.f_a - p.D_a;
  const double det = C.AA * C.aa - C.Aa * C.aA;
  return {(C.aa * gA - C.Aa * ga) / det, (C.AA * ga - C.aA * gA) / det};
}

PerturbationExpansion perturbation_equilibrium(const EcoParams& p, double pr) {
  const auto& C = p.C;
  if (!(p.f_A > p.D_A && p.f_a > p.D_a)) {
    throw std::invalid_argument("perturbation_equilibrium: need f_alpha > D_alpha for both alleles");
  }
  const double S_aA = invasion_fitness(p, Allele::a);
  const double S_Aa = invasion_fitness(p, Allele::A);
  PerturbationExpansion out;
  if (S_aA > 0.0 && S_Aa < 0.0) {
    out.clause = ExpansionClause::mutant_fixation;
    const double nbar_a = equilibrium_density(p, Allele::a);
    const double g_a = p.f_a - p.D_a;
    out.zeroth = {0.0, nbar_a};
    // Linearization at (0, n̄_a): S_Aa dn_A + f_a n̄_a = 0, and
    // -C_aa n̄_a dn_a - C_aA n̄_a dn_A - f_a n̄_a = 0.
    const double dA = p.f_a * nbar_a / std::abs(S_Aa);
    out.first_order = {dA, -(p.f_a + C.aA * dA) / C.aa};
    const double printed_den = C.Aa * S_aA;
    out.printed_first_order = {p.f_a * g_a / printed_den,
                               -p.f_a / C.aa * (C.Aa * S_aA + g_a * C.aA) / printed_den};
  } else if (S_aA > 0.0 && S_Aa > 0.0) {
    out.clause = ExpansionClause::coexistence;
    const Vec2 nbar = coexistence_equilibrium(p);
    out.zeroth = nbar;
    const double det = C.aa * C.AA - C.aA * C.Aa;
    const double uA = p.f_a * nbar[1] / nbar[0] - p.f_A * pr;
    const double ua = p.f_A * pr * nbar[0] / nbar[1] - p.f_a;
    out.first_order = {(C.aa * uA - C.Aa * ua) / det, (C.AA * ua - C.aA * uA) / det};
    out.printed_first_order = out.first_order;
  } else {
    throw std::invalid_argument("perturbation_equilibrium: need S_aA > 0 > S_Aa or S_aA, S_Aa > 0");
  }
  return out;
}

EntryTime entry_time(const EcoParams& p, const Vec2& z, double eps, double horizon,
                     const IntegratorOptions& options) {
  const double S_aA = invasion_fitness(p, Allele::a);
  const double S_Aa = invasion_fitness(p, Allele::A);
  if (!(S_aA > 0.0 && S_Aa < 0.0)) throw std::invalid_argument("entry_time: need S_aA > 0 > S_Aa");
  if (!(z[1] > 0.0) || z[0] < 0.0) throw std::invalid_argument("entry_time: need z_a > 0 and z_A >= 0");
  const double eps_max = std::min(p.C.aa / p.C.aA, 2.0 * std::abs(S_Aa) / p.C.Aa);
  if (!(eps > 0.0 && eps <= eps_max)) throw std::invalid_argument("entry_time: epsilon outside (0, " + std::to_string(eps_max) + "]");

  const double nbar_a = equilibrium_density(p, Allele::a);
  auto inside = [&](const Vec2& n) { return n[0] <= eps * eps / 2.0 && n[1] >= nbar_a - eps / 2.0; };

  const Solution sol = integrate([&](const Vec2& n) { return lv_rhs(p, n); }, z, horizon, options);
  if (!inside(sol(horizon))) throw std::runtime_error("entry_time: trajectory outside the target box at the horizon");

  // Last probe outside the box and the probe that follows it.
  constexpr int kProbes = 16;
  double lo = inside(z) ? -1.0 : 0.0;
  double hi = horizon;
  bool pending = lo == 0.0;
  for (const auto& s : sol.steps()) {
    for (int k = 1; k <= kProbes; ++k) {
      const double t = s.t0 + s.h * k / kProbes;
      if (!inside(sol(t))) {
        lo = t;
        pending = true;
      } else if (pending) {
        hi = t;
        pending = false;
      }
    }
  }
  EntryTime out;
  out.horizon = horizon;
  if (lo < 0.0) return out;
  for (int it = 0; it < 80 && hi - lo > 1e-14 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (inside(sol(mid))) hi = mid; else lo = mid;
  }
  out.time = hi;
  return out;
}

}  // namespace softsweep
