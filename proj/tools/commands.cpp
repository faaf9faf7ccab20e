#include "commands.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "pool.hpp"
#include "softsweep/bd_oracles.hpp"
#include "softsweep/gem.hpp"
#include "softsweep/gillespie.hpp"
#include "softsweep/version.hpp"

namespace softsweep::cli {

using nlohmann::json;

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json ecology_json(const EcoParams& p) {
  return {{"f_A", p.f_A}, {"f_a", p.f_a}, {"D_A", p.D_A}, {"D_a", p.D_a},
          {"C", {{"AA", p.C.AA}, {"Aa", p.C.Aa}, {"aA", p.C.aA}, {"aa", p.C.aa}}}};
}

json header(const std::string& command, const RunConfig& cfg) {
  return {{"record", "header"},     {"tool", "softsweep"},   {"version", kVersion},
          {"command", command},     {"seed", cfg.seed},      {"replicates", cfg.replicates},
          {"config", cfg.resolved}, {"ecology", ecology_json(cfg.ecology)}};
}

void apply(RunConfig& cfg, const Overrides& o) {
  if (o.seed) cfg.seed = *o.seed;
  if (o.replicates) cfg.replicates = *o.replicates;
}

std::filesystem::path prepare(const RunConfig& cfg, const Overrides& o) {
  const std::filesystem::path dir = resolve_out_dir(cfg, o);
  std::filesystem::create_directories(dir);
  return dir;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

/// Comment lines carrying version and configuration at the top of CSV files.
void csv_preamble(std::ostream& out, const std::string& command, const RunConfig& cfg) {
  out << "# softsweep " << kVersion << " " << command << "\n";
  out << "# seed " << cfg.seed << " replicates " << cfg.replicates << "\n";
  out << "# config " << cfg.resolved.dump() << "\n";
  out << "# ecology " << ecology_json(cfg.ecology).dump() << "\n";
}

std::string fmt(double v) {
  if (!std::isfinite(v)) return "nan";
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

json outcome_json(std::size_t replicate, const SweepOutcome& o) {
  json tallies = json::object();
  for (std::size_t e = 0; e < kEventClassCount; ++e) tallies[to_string(static_cast<EventClass>(e))] = o.tallies[e];
  return {{"record", "replicate"},
          {"replicate", replicate},
          {"seed", o.seed},
          {"K", o.K},
          {"regime", o.regime},
          {"epsilon", o.epsilon},
          {"T_eps", opt(o.T_eps)},
          {"S_eps", opt(o.S_eps)},
          {"T_F", opt(o.T_F)},
          {"spectrum", o.spectrum},
          {"identity", opt(o.identity)},
          {"tallies", tallies},
          {"termination", to_string(o.termination)},
          {"t_end", o.t_end},
          {"n_A_ancestral", o.n_A_ancestral},
          {"n_A_back", o.n_A_back},
          {"n_a", o.n_a},
          {"families_founded", o.families_founded}};
}

SweepCaps caps_of(const RunConfig& cfg) {
  SweepCaps caps;
  caps.epsilon = cfg.epsilon;
  caps.max_events = cfg.max_events;
  caps.max_time = cfg.max_time;
  caps.override_conditions = cfg.override_conditions;
  return caps;
}

/// All replicates for every K, ordered by (K, replicate).
std::vector<std::vector<SweepOutcome>> run_batch(const RunConfig& cfg, std::size_t workers) {
  const SweepCaps caps = caps_of(cfg);
  std::vector<std::vector<SweepOutcome>> out(cfg.K.size(), std::vector<SweepOutcome>(cfg.replicates));
  const std::size_t R = cfg.replicates;
  parallel_for(cfg.K.size() * R, workers, [&](std::size_t job) {
    const std::size_t k = job / R;
    const std::size_t r = job % R;
    out[k][r] = run_sweep(cfg.ecology, cfg.regime, cfg.K[k], replicate_seed(cfg.seed, r), caps);
  });
  return out;
}

void write_records(const std::filesystem::path& path, const std::string& command, const RunConfig& cfg,
                   const std::vector<std::vector<SweepOutcome>>& batch) {
  std::ofstream out = open_out(path);
  out << header(command, cfg).dump() << "\n";
  for (const auto& per_K : batch) {
    for (std::size_t r = 0; r < per_K.size(); ++r) out << outcome_json(r, per_K[r]).dump() << "\n";
  }
}

/// Sweep-duration limit of T_F / log K for the configured scaling, when one exists.
std::optional<double> duration_prediction(const EcoParams& p, const MutationRegime& regime) {
  const double S_aA = invasion_fitness(p, Allele::a);
  const double S_Aa = std::abs(invasion_fitness(p, Allele::A));
  switch (regime_index(regime)) {
    case 1:
    case 2: return 1.0 / S_aA + 1.0 / S_Aa;
    case 3: return (1.0 - std::get<Regime3>(regime).beta) / S_aA + 1.0 / S_Aa;
    default: return std::nullopt;
  }
}

void validate_sweep_config(const RunConfig& cfg) {
  try {
    validate(cfg.ecology);
    if (!cfg.override_conditions) {
      const SweepConditionReport rep = validate_sweep_conditions(cfg.ecology);
      if (!rep.ok) {
        std::string msg;
        for (const auto& f : rep.failures) msg += (msg.empty() ? "" : "; ") + f;
        throw ConfigError("ecology", msg);
      }
    }
    for (double K : cfg.K) (void)mutation_probability(cfg.regime, K);
    if (std::holds_alternative<Regime4>(cfg.regime) && !cfg.override_conditions) {
      throw ConfigError("regime.variant", "variant 4 has no sweep limit; set experiment.override_conditions to simulate it");
    }
    if (cfg.epsilon && !cfg.override_conditions && !(*cfg.epsilon < epsilon_bound(cfg.ecology))) {
      throw ConfigError("experiment.epsilon", "must be below " + fmt(epsilon_bound(cfg.ecology)));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("ecology", e.what());
  }
}

json vec_json(const Vec2& v) { return json::array({num(v[0]), num(v[1])}); }

json complex_json(const std::complex<double>& z) { return {{"re", z.real()}, {"im", z.imag()}}; }

json report_json(const FixedPointReport& r) {
  const Mat2& J = r.jacobian;
  return {{"n", vec_json(r.n)},
          {"rho", opt(r.rho)},
          {"jacobian", json::array({json::array({J.a11, J.a12}), json::array({J.a21, J.a22})})},
          {"eigenvalues", json::array({complex_json(r.eigen[0]), complex_json(r.eigen[1])})},
          {"kind", to_string(r.kind)},
          {"index", r.index ? json(*r.index) : json(nullptr)},
          {"residual", r.residual},
          {"cubic_residual", r.cubic_residual},
          {"degenerate_root", r.degenerate_root}};
}

/// Unit eigenvector of the positive eigenvalue of a saddle.
Vec2 unstable_direction(const FixedPointReport& r) {
  const Mat2& J = r.jacobian;
  const double lam = std::max(r.eigen[0].real(), r.eigen[1].real());
  Vec2 u{J.a12, lam - J.a11};
  const Vec2 w{lam - J.a22, J.a21};
  if (std::hypot(w[0], w[1]) > std::hypot(u[0], u[1])) u = w;
  const double norm = std::hypot(u[0], u[1]);
  return {u[0] / norm, u[1] / norm};
}

struct Binomial {
  std::uint64_t hits = 0;
  std::uint64_t n = 0;
  json to_json(double expected) const {
    if (n == 0) return {{"n", 0}, {"frequency", nullptr}, {"expected", expected}, {"z", nullptr}};
    const double f = static_cast<double>(hits) / static_cast<double>(n);
    const double sd = std::sqrt(expected * (1.0 - expected) / static_cast<double>(n));
    return {{"n", n}, {"hits", hits}, {"frequency", f}, {"expected", expected}, {"z", num(sd > 0.0 ? (f - expected) / sd : 0.0)}};
  }
};

}  // namespace

std::string resolve_out_dir(const RunConfig& config, const Overrides& overrides) {
  if (overrides.out_dir) return *overrides.out_dir;
  if (const char* env = std::getenv("SOFTSWEEP_OUT_DIR"); env && *env) return env;
  if (config.out_dir) return *config.out_dir;
  return ".";
}

std::vector<std::string> cmd_sweep(RunConfig cfg, const Overrides& o) {
  apply(cfg, o);
  validate_sweep_config(cfg);
  const auto dir = prepare(cfg, o);
  const auto batch = run_batch(cfg, o.workers);
  const auto path = dir / "sweep.jsonl";
  write_records(path, "sweep", cfg, batch);
  return {path.string()};
}

std::vector<std::string> cmd_spectrum(RunConfig cfg, const Overrides& o) {
  apply(cfg, o);
  validate_sweep_config(cfg);
  const auto dir = prepare(cfg, o);
  const auto batch = run_batch(cfg, o.workers);
  const auto jsonl = dir / "spectrum.jsonl";
  write_records(jsonl, "spectrum", cfg, batch);

  const auto csv_path = dir / "spectrum.csv";
  std::ofstream csv = open_out(csv_path);
  csv_preamble(csv, "spectrum", cfg);
  csv << "K,regime,statistic,value,se,n\n";
  const int regime = regime_index(cfg.regime);
  std::optional<IdentityPrediction> prediction;
  std::optional<GemTheta> theta;
  if (regime != 4) prediction = predicted_identity(cfg.ecology, cfg.regime);
  if (regime == 2) theta = gem_theta(cfg.ecology, cfg.regime);

  for (std::size_t k = 0; k < cfg.K.size(); ++k) {
    auto row = [&](const std::string& stat, double value, double se, std::size_t n) {
      csv << fmt(cfg.K[k]) << "," << regime << "," << stat << "," << fmt(value) << "," << fmt(se) << "," << n << "\n";
    };
    std::vector<std::vector<double>> spectra;
    for (const auto& out : batch[k]) {
      if (out.termination == Termination::fixed && !out.spectrum.empty()) spectra.push_back(out.spectrum);
    }
    row("fixed_runs", static_cast<double>(spectra.size()), 0.0, batch[k].size());
    if (prediction) {
      row("predicted_identity_gem", prediction->gem, 0.0, 0);
      row("predicted_identity_corollary", prediction->corollary, 0.0, 0);
    }
    if (theta) {
      row("theta", theta->theta, 0.0, 0);
      row("theta_with_lambda_aA", theta->theta_aA, 0.0, 0);
      row("theta_ewens", theta->ewens_theta, 0.0, 0);
    }
    if (spectra.empty()) continue;
    const SpectrumSummary s = spectrum_summary(spectra, cfg.ranks);
    // Exact without-replacement identity per replicate, alongside sum p_i^2.
    double id_sum = 0.0, id_sq = 0.0;
    std::size_t id_n = 0;
    for (const auto& out : batch[k]) {
      if (out.termination != Termination::fixed || !out.identity) continue;
      id_sum += *out.identity;
      id_sq += *out.identity * *out.identity;
      ++id_n;
    }
    if (id_n > 0) {
      const double m = id_sum / static_cast<double>(id_n);
      const double var = id_n > 1 ? std::max(0.0, (id_sq - id_n * m * m) / (id_n - 1.0)) : 0.0;
      row("pairwise_identity", m, std::sqrt(var / static_cast<double>(id_n)), id_n);
    }
    row("sum_squared_fractions", s.mean_identity, s.se_identity, s.count);
    row("first_family_fraction", s.mean_first, s.se_first, s.count);
    row("largest_family_fraction", s.mean_largest, s.se_largest, s.count);
    row("surviving_families", s.mean_families, 0.0, s.count);
    for (std::size_t r = 0; r < s.mean_ranked.size(); ++r) row("ranked_" + std::to_string(r + 1), s.mean_ranked[r], 0.0, s.count);
    for (std::size_t r = 0; r < s.mean_aged.size(); ++r) row("aged_" + std::to_string(r + 1), s.mean_aged[r], 0.0, s.count);
  }
  return {jsonl.string(), csv_path.string()};
}

std::vector<std::string> cmd_duration(RunConfig cfg, const Overrides& o) {
  apply(cfg, o);
  validate_sweep_config(cfg);
  const auto dir = prepare(cfg, o);
  const auto batch = run_batch(cfg, o.workers);
  const auto jsonl = dir / "duration.jsonl";
  write_records(jsonl, "duration", cfg, batch);

  const auto csv_path = dir / "duration.csv";
  std::ofstream csv = open_out(csv_path);
  csv_preamble(csv, "duration", cfg);
  csv << "K,log_K,replicates,fixed,mean_TF_over_logK,se,predicted,relative_deviation,mean_T_eps_over_logK\n";
  const std::optional<double> predicted = duration_prediction(cfg.ecology, cfg.regime);
  for (std::size_t k = 0; k < cfg.K.size(); ++k) {
    const double logK = std::log(cfg.K[k]);
    double sum = 0.0, sq = 0.0, eps_sum = 0.0;
    std::size_t n = 0, eps_n = 0;
    for (const auto& out : batch[k]) {
      if (out.T_eps) {
        eps_sum += *out.T_eps / logK;
        ++eps_n;
      }
      if (out.termination != Termination::fixed) continue;
      const double x = *out.T_F / logK;
      sum += x;
      sq += x * x;
      ++n;
    }
    const double mean = n > 0 ? sum / static_cast<double>(n) : std::nan("");
    const double se = n > 1 ? std::sqrt(std::max(0.0, (sq - n * mean * mean) / (n - 1.0)) / static_cast<double>(n)) : std::nan("");
    const double dev = predicted && n > 0 ? (mean - *predicted) / *predicted : std::nan("");
    csv << fmt(cfg.K[k]) << "," << fmt(logK) << "," << batch[k].size() << "," << n << "," << fmt(mean) << "," << fmt(se)
        << "," << (predicted ? fmt(*predicted) : "nan") << "," << fmt(dev) << ","
        << fmt(eps_n > 0 ? eps_sum / static_cast<double>(eps_n) : std::nan("")) << "\n";
  }
  return {jsonl.string(), csv_path.string()};
}

std::vector<std::string> cmd_ode(RunConfig cfg, const Overrides& o) {
  apply(cfg, o);
  const auto dir = prepare(cfg, o);
  const EcoParams& p = cfg.ecology;
  const MutationRates lambda = ode_rates(cfg);
  const bool mutation = lambda.Aa > 0.0 || lambda.aA > 0.0;

  json doc = header("ode", cfg);
  doc["lambda"] = {{"Aa", lambda.Aa}, {"aA", lambda.aA}};
  doc["rho"] = {{"A", growth_rate(p, lambda, Allele::A)}, {"a", growth_rate(p, lambda, Allele::a)}};
  if (lambda.aA > 0.0) {
    const CubicData c = cubic_coefficients(p, lambda);
    const CubicRoots roots = cubic_roots(c);
    doc["cubic"] = {{"p", c.p},           {"q", c.q}, {"r", c.r}, {"delta", c.delta},
                    {"poly", c.poly},     {"branch", to_string(roots.branch)},
                    {"roots", roots.roots}, {"degenerate", roots.degenerate}};
  } else {
    doc["cubic"] = nullptr;
  }

  const auto points = interior_fixed_points(p, lambda);
  json interior = json::array();
  for (const auto& r : points) interior.push_back(report_json(r));
  doc["interior"] = interior;
  doc["origin"] = report_json(origin_report(p, lambda));
  if (!mutation) {
    json boundary = json::array();
    if (equilibrium_density(p, Allele::A) > 0.0) boundary.push_back(report_json(make_report(p, lambda, {equilibrium_density(p, Allele::A), 0.0})));
    if (equilibrium_density(p, Allele::a) > 0.0) boundary.push_back(report_json(make_report(p, lambda, {0.0, equilibrium_density(p, Allele::a)})));
    doc["boundary"] = boundary;
  }
  const IndexSum isum = index_sum(points);
  doc["index_sum"] = {{"sum", isum.sum}, {"determinate", isum.determinate}};

  const ConditionReport cond = check_conditions(p, lambda);
  json brackets = json::array();
  for (const auto& b : cond.brackets) brackets.push_back({{"allele", to_string(b.allele)}, {"lower", b.lower}, {"upper", b.upper}});
  doc["conditions"] = {{"determinant_condition", cond.determinant_condition},
                       {"delta_A", cond.delta_A},
                       {"delta_a", cond.delta_a},
                       {"n_star_A", cond.n_star_A},
                       {"n_star_a", cond.n_star_a},
                       {"S_tilde_Aa", cond.S_tilde_Aa},
                       {"S_tilde_aA", cond.S_tilde_aA},
                       {"assumption_A", cond.assumption_A},
                       {"assumption_C", cond.assumption_C},
                       {"unique_sink_guaranteed", cond.unique_sink_guaranteed},
                       {"brackets", brackets},
                       {"issues", cond.verify(points)}};

  struct Run {
    std::string label;
    Vec2 n0;
  };
  std::vector<Run> runs;
  for (std::size_t i = 0; i < cfg.ode.initial.size(); ++i) runs.push_back({"initial_" + std::to_string(i), cfg.ode.initial[i]});
  if (cfg.ode.basin) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (points[i].kind != FixedPointKind::saddle) continue;
      const Vec2 u = unstable_direction(points[i]);
      const double h = cfg.ode.basin_offset;
      for (const double sign : {1.0, -1.0}) {
        runs.push_back({"saddle_" + std::to_string(i) + (sign > 0 ? "_plus" : "_minus"),
                        {points[i].n[0] + sign * h * u[0], points[i].n[1] + sign * h * u[1]}});
      }
    }
  }

  IntegratorOptions opts;
  opts.rtol = cfg.ode.rtol;
  opts.atol = cfg.ode.atol;
  std::vector<double> times(cfg.ode.samples);
  for (std::size_t i = 0; i < times.size(); ++i) {
    times[i] = cfg.ode.t_end * static_cast<double>(i) / static_cast<double>(times.size() - 1);
  }
  const Rhs rhs = [&](const Vec2& n) { return mut_rhs(p, lambda, n); };
  std::vector<Trajectory> trajectories(runs.size());
  parallel_for(runs.size(), o.workers, [&](std::size_t i) { trajectories[i] = integrate(rhs, runs[i].n0, times, opts); });

  const auto csv_path = dir / "trajectories.csv";
  std::ofstream csv = open_out(csv_path);
  csv_preamble(csv, "ode", cfg);
  csv << "trajectory,t,n_A,n_a\n";
  json traj = json::array();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const Trajectory& tr = trajectories[i];
    for (std::size_t k = 0; k < tr.t.size(); ++k) csv << runs[i].label << "," << fmt(tr.t[k]) << "," << fmt(tr.n[k][0]) << "," << fmt(tr.n[k][1]) << "\n";
    const Vec2 end = tr.n.back();
    const Vec2 v = rhs(end);
    json nearest = nullptr;
    double best = 1e-4;
    for (std::size_t j = 0; j < points.size(); ++j) {
      const double dist = std::hypot(end[0] - points[j].n[0], end[1] - points[j].n[1]);
      if (dist < best) {
        best = dist;
        nearest = j;
      }
    }
    traj.push_back({{"label", runs[i].label}, {"initial", vec_json(runs[i].n0)}, {"final", vec_json(end)},
                    {"velocity_norm", std::hypot(v[0], v[1])}, {"interior_point", nearest}});
  }
  doc["trajectories"] = traj;

  const auto json_path = dir / "ode.json";
  std::ofstream js = open_out(json_path);
  js << doc.dump(2) << "\n";
  return {json_path.string(), csv_path.string()};
}

std::vector<std::string> cmd_oracle(RunConfig cfg, const Overrides& o) {
  apply(cfg, o);
  const auto dir = prepare(cfg, o);
  const OracleExperiment& ox = cfg.oracle;
  const std::size_t R = cfg.replicates;
  BDRates rates;
  rates.b = ox.b;
  rates.d = ox.d;
  json doc = header("oracle", cfg);
  doc["rates"] = {{"b", ox.b}, {"d", ox.d}};
  auto section_seed = [&](std::uint64_t tag) { return replicate_seed(cfg.seed, 1'000'000'000ULL + tag); };

  // Extinction by time t and hitting of the upper level, from each start.
  json extinction = json::array();
  json hitting = json::array();
  for (std::size_t s = 0; s < ox.starts.size(); ++s) {
    const std::int64_t i = ox.starts[s];
    std::vector<char> extinct(R), hit(R);
    const std::uint64_t seed_ext = section_seed(2 * s);
    const std::uint64_t seed_hit = section_seed(2 * s + 1);
    parallel_for(R, o.workers, [&](std::size_t r) {
      Rng rng(replicate_seed(seed_ext, r));
      BDStop stop;
      stop.horizon = ox.t;
      extinct[r] = simulate_bd(rates, i, stop, rng).exit == BDExit::lower;
      Rng rng2(replicate_seed(seed_hit, r));
      BDStop stop2;
      stop2.upper = ox.hit_upper;
      hit[r] = simulate_bd(rates, i, stop2, rng2).exit == BDExit::upper;
    });
    Binomial be{static_cast<std::uint64_t>(std::count(extinct.begin(), extinct.end(), 1)), R};
    Binomial bh{static_cast<std::uint64_t>(std::count(hit.begin(), hit.end(), 1)), R};
    json e = be.to_json(bd_extinction_cdf(ox.b, ox.d, i, ox.t));
    e["start"] = i;
    e["t"] = ox.t;
    extinction.push_back(e);
    json h = bh.to_json(bd_hitting_prob(ox.b, ox.d, 0, i, ox.hit_upper));
    h["start"] = i;
    h["upper"] = ox.hit_upper;
    hitting.push_back(h);
  }
  doc["extinction"] = extinction;
  doc["hitting"] = hitting;

  // T_N / log N on the survival event.
  {
    std::vector<std::optional<double>> slope(R);
    const std::uint64_t seed = section_seed(100);
    parallel_for(R, o.workers, [&](std::size_t r) {
      Rng rng(replicate_seed(seed, r));
      BDStop stop;
      stop.upper = ox.slope_N;
      const BDRecord rec = simulate_bd(rates, 1, stop, rng);
      if (rec.exit == BDExit::upper) slope[r] = rec.t_final / std::log(static_cast<double>(ox.slope_N));
    });
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& v : slope) {
      if (v) {
        sum += *v;
        ++n;
      }
    }
    doc["hitting_time_slope"] = {{"N", ox.slope_N}, {"survivors", n}, {"mean", n ? json(sum / n) : json(nullptr)},
                                 {"expected", bd_hitting_time_slope(ox.b, ox.d)}};
  }

  // Family structure of the process with immigration.
  {
    std::vector<std::vector<double>> spectra(R);
    std::vector<std::optional<double>> pairwise(R);
    const std::uint64_t seed = section_seed(200);
    parallel_for(R, o.workers, [&](std::size_t r) {
      Rng rng(replicate_seed(seed, r));
      const FamilyCounts fam = gem_oracle_population(ox.immigration, ox.gem_b, ox.gem_d, ox.gem_time, rng);
      spectra[r] = haplotype_spectrum(fam);
      if (fam.total() >= 2) pairwise[r] = pairwise_identity(fam);
    });
    const double theta = ox.immigration / ox.gem_b;
    const IdentityPrediction pred = gem_identity_prob(theta);
    json gem = {{"immigration", ox.immigration}, {"b", ox.gem_b}, {"d", ox.gem_d}, {"t", ox.gem_time}, {"theta", theta},
                {"predicted_identity_gem", pred.gem}, {"predicted_identity_corollary", pred.corollary}};
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (const auto& v : pairwise) {
      if (!v) continue;
      sum += *v;
      sq += *v * *v;
      ++n;
    }
    gem["pairwise_count"] = n;
    if (n > 1) {
      const double m = sum / static_cast<double>(n);
      const double se = std::sqrt(std::max(0.0, (sq - n * m * m) / (n - 1.0)) / static_cast<double>(n));
      gem["mean_pairwise_identity"] = m;
      gem["se_pairwise_identity"] = se;
      gem["z_gem"] = num(se > 0 ? (m - pred.gem) / se : std::nan(""));
      gem["z_corollary"] = num(se > 0 ? (m - pred.corollary) / se : std::nan(""));
    }
    if (std::any_of(spectra.begin(), spectra.end(), [](const auto& s) { return !s.empty(); })) {
      const SpectrumSummary s = spectrum_summary(spectra);
      gem["count"] = s.count;
      gem["mean_sum_squared_fractions"] = s.mean_identity;
      gem["mean_first"] = s.mean_first;
      gem["se_first"] = s.se_first;
    } else {
      gem["count"] = 0;
    }
    doc["gem"] = gem;
  }

  // Coupled pair moment against the rate gap.
  {
    json rows = json::array();
    std::vector<double> xs, ys;
    for (std::size_t g = 0; g < ox.gaps.size(); ++g) {
      const CoupledPairReport rep = coupled_bd_pair(ox.b, ox.d, ox.b + ox.gaps[g], ox.d, ox.coupled_horizon, R, section_seed(300 + g));
      rows.push_back({{"gap", ox.gaps[g]}, {"sup_second_moment", rep.sup_second_moment}, {"argsup_time", rep.argsup_time}});
      xs.push_back(ox.gaps[g]);
      ys.push_back(rep.sup_second_moment);
    }
    json coupled = {{"horizon", ox.coupled_horizon}, {"rows", rows}};
    if (xs.size() >= 2 && R > 0) {
      const double n = static_cast<double>(xs.size());
      double mx = 0, my = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i] / n;
        my += ys[i] / n;
      }
      double sxx = 0, sxy = 0, syy = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
      }
      coupled["slope"] = num(sxy / sxx);
      coupled["r_squared"] = num(syy > 0 ? sxy * sxy / (sxx * syy) : std::nan(""));
    }
    doc["coupled"] = coupled;
  }

  doc["logistic"] = {{"K", ox.logistic_K},
                     {"eta", ox.logistic_eta},
                     {"horizon", ox.logistic_horizon},
                     {"exit_frequency", logistic_sojourn(ox.b, ox.d, 1.0, ox.logistic_K, ox.logistic_eta, ox.logistic_eta,
                                                         ox.logistic_horizon, R, section_seed(400))}};

  const auto path = dir / "oracle.json";
  std::ofstream out = open_out(path);
  out << doc.dump(2) << "\n";
  return {path.string()};
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-allele sweep simulator and Lotka-Volterra analysis"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicates;
  std::size_t workers = 1;
  std::optional<std::string> out_dir;

  struct Command {
    const char* name;
    const char* help;
    std::vector<std::string> (*fn)(RunConfig, const Overrides&);
  };
  const Command commands[] = {
      {"sweep", "Simulate sweeps and write one JSON record per replicate", cmd_sweep},
      {"spectrum", "Compare haplotype spectra with the GEM predictions", cmd_spectrum},
      {"duration", "Tabulate T_F / log K over the K grid", cmd_duration},
      {"ode", "Fixed points, classification and trajectories of the deterministic system", cmd_ode},
      {"oracle", "Birth-death oracle validation report", cmd_oracle},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config_path, "YAML configuration file")->required();
    sub->add_option("--seed", seed, "Master seed (overrides the config)");
    sub->add_option("--replicates", replicates, "Replicates per K (overrides the config)");
    sub->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out-dir", out_dir, "Output directory (overrides SOFTSWEEP_OUT_DIR and the config)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  for (const auto& c : commands) {
    if (!app.got_subcommand(c.name)) continue;
    try {
      const RunConfig cfg = load_config(config_path);
      const std::vector<std::string> files = c.fn(cfg, Overrides{seed, replicates, workers, out_dir});
      for (const auto& f : files) out << f << "\n";
      return 0;
    } catch (const ConfigError& e) {
      err << "config error: " << e.what() << "\n";
      return 2;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return 1;
}

}  // namespace softsweep::cli
