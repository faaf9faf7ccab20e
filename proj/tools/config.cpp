#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace softsweep::cli {

namespace {

std::string located(const std::string& field, const std::string& message, int line) {
  std::string out = field + ": " + message;
  if (line >= 0) out += " (line " + std::to_string(line) + ")";
  return out;
}

int line_of(const YAML::Node& node) {
  const YAML::Mark mark = node.Mark();
  return mark.line >= 0 ? mark.line + 1 : -1;
}

nlohmann::json to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Map: {
      nlohmann::json out = nlohmann::json::object();
      for (const auto& kv : node) out[kv.first.as<std::string>()] = to_json(kv.second);
      return out;
    }
    case YAML::NodeType::Sequence: {
      nlohmann::json out = nlohmann::json::array();
      for (const auto& item : node) out.push_back(to_json(item));
      return out;
    }
    case YAML::NodeType::Scalar: {
      const std::string s = node.Scalar();
      if (node.Tag() == "!") return s;  // quoted
      long long i = 0;
      if (YAML::convert<long long>::decode(node, i) && s.find_first_of(".eE") == std::string::npos) return i;
      double d = 0.0;
      if (YAML::convert<double>::decode(node, d)) return d;
      bool b = false;
      if (YAML::convert<bool>::decode(node, b)) return b;
      return s;
    }
    default:
      return nullptr;
  }
}

class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (node_ && !node_.IsMap()) throw ConfigError(path_, "expected a mapping", line_of(node_));
  }

  bool present() const { return static_cast<bool>(node_) && node_.IsMap(); }
  bool has(const std::string& key) const { return present() && node_[key]; }
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  YAML::Node get(const std::string& key) {
    used_.insert(key);
    return present() ? node_[key] : YAML::Node();
  }

  Section child(const std::string& key) { return Section(get(key), field(key)); }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const YAML::Node n = get(key);
    if (!n) {
      if (fallback) return *fallback;
      throw ConfigError(field(key), "required field missing", line_of(node_));
    }
    return as_number(n, field(key));
  }

  std::optional<double> optional_number(const std::string& key) {
    const YAML::Node n = get(key);
    if (!n || n.IsNull()) return std::nullopt;
    return as_number(n, field(key));
  }

  std::uint64_t count(const std::string& key, std::uint64_t fallback) {
    const YAML::Node n = get(key);
    if (!n) return fallback;
    const double v = as_number(n, field(key));
    if (v < 0.0 || v != std::floor(v) || v > 1.8e19) {
      throw ConfigError(field(key), "expected a nonnegative integer", line_of(n));
    }
    return static_cast<std::uint64_t>(v);
  }

  bool flag(const std::string& key, bool fallback) {
    const YAML::Node n = get(key);
    if (!n) return fallback;
    bool b = false;
    if (!n.IsScalar() || !YAML::convert<bool>::decode(n, b)) throw ConfigError(field(key), "expected true or false", line_of(n));
    return b;
  }

  std::optional<std::string> text(const std::string& key) {
    const YAML::Node n = get(key);
    if (!n || n.IsNull()) return std::nullopt;
    if (!n.IsScalar()) throw ConfigError(field(key), "expected a string", line_of(n));
    return n.Scalar();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    const YAML::Node n = get(key);
    if (!n) return fallback;
    std::vector<double> out;
    if (n.IsScalar()) {
      out.push_back(as_number(n, field(key)));
    } else if (n.IsSequence()) {
      for (std::size_t i = 0; i < n.size(); ++i) out.push_back(as_number(n[i], field(key) + "[" + std::to_string(i) + "]"));
    } else {
      throw ConfigError(field(key), "expected a number or a list of numbers", line_of(n));
    }
    return out;
  }

  /// Rejects keys that were never read.
  void finish() const {
    if (!present()) return;
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!used_.count(key)) throw ConfigError(field(key), "unknown field", line_of(kv.first));
    }
  }

  static double as_number(const YAML::Node& n, const std::string& field) {
    double v = 0.0;
    if (!n.IsScalar() || !YAML::convert<double>::decode(n, v) || !std::isfinite(v)) {
      throw ConfigError(field, "expected a finite number", line_of(n));
    }
    return v;
  }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> used_;
};

double positive(double v, const std::string& field, int line = -1) {
  if (!(v > 0.0)) throw ConfigError(field, "must be positive", line);
  return v;
}

MutationRegime parse_regime(Section& s) {
  if (!s.present()) throw ConfigError("regime", "required section missing");
  const double variant = s.number("variant");
  const double l_Aa = s.number("lambda_Aa", 0.0);
  const double l_aA = s.number("lambda_aA", 0.0);
  const std::optional<double> beta = s.optional_number("beta");
  if (l_Aa < 0.0) throw ConfigError(s.field("lambda_Aa"), "must be nonnegative");
  if (l_aA < 0.0) throw ConfigError(s.field("lambda_aA"), "must be nonnegative");
  MutationRegime regime;
  if (variant == 1) {
    regime = Regime1{l_Aa, l_aA, {}, {}};
  } else if (variant == 2) {
    regime = Regime2{l_Aa, l_aA};
  } else if (variant == 3) {
    if (!beta) throw ConfigError(s.field("beta"), "required for variant 3");
    regime = Regime3{l_Aa, l_aA, *beta};
  } else if (variant == 4) {
    regime = Regime4{l_Aa, l_aA};
  } else {
    throw ConfigError(s.field("variant"), "must be 1, 2, 3 or 4");
  }
  if (beta && variant != 3) throw ConfigError(s.field("beta"), "only meaningful for variant 3");
  try {
    validate(regime);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("regime", e.what());
  }
  s.finish();
  return regime;
}

void parse_ecology(Section& s, RunConfig& cfg) {
  if (!s.present()) throw ConfigError("ecology", "required section missing");
  EcoParams& p = cfg.ecology;
  p.f_A = positive(s.number("f_A"), s.field("f_A"));
  p.f_a = positive(s.number("f_a"), s.field("f_a"));
  Section c = s.child("C");
  if (!c.present()) throw ConfigError(s.field("C"), "required section missing");
  p.C.AA = positive(c.number("AA"), c.field("AA"));
  p.C.Aa = positive(c.number("Aa"), c.field("Aa"));
  p.C.aA = positive(c.number("aA"), c.field("aA"));
  p.C.aa = positive(c.number("aa"), c.field("aa"));
  c.finish();

  const bool rho4 = std::holds_alternative<Regime4>(cfg.regime);
  const double l_Aa = rho4 ? lambda_Aa(cfg.regime) : 0.0;
  const double l_aA = rho4 ? lambda_aA(cfg.regime) : 0.0;
  auto death = [&](const std::string& d_key, const std::string& rho_key, double f, double lambda) {
    const bool has_d = s.has(d_key);
    const bool has_rho = s.has(rho_key);
    if (has_d == has_rho) throw ConfigError(s.field(d_key), "give exactly one of " + d_key + " and " + rho_key);
    const double v = has_d ? s.number(d_key) : f * (1.0 - lambda) - s.number(rho_key);
    if (v < 0.0) throw ConfigError(s.field(has_d ? d_key : rho_key), "implies a negative death rate");
    s.get(has_d ? rho_key : d_key);
    return v;
  };
  p.D_A = death("D_A", "rho_A", p.f_A, l_Aa);
  p.D_a = death("D_a", "rho_a", p.f_a, l_aA);
  cfg.K = s.numbers("K", {1000.0});
  for (std::size_t i = 0; i < cfg.K.size(); ++i) {
    if (!(cfg.K[i] >= 1.0)) throw ConfigError(s.field("K") + "[" + std::to_string(i) + "]", "must be at least 1");
  }
  p.K = cfg.K.front();
  s.finish();
}

void parse_ode(Section& s, OdeExperiment& ode) {
  if (!s.present()) return;
  const YAML::Node init = s.get("initial");
  if (init) {
    if (!init.IsSequence()) throw ConfigError(s.field("initial"), "expected a list of [n_A, n_a] pairs", line_of(init));
    for (std::size_t i = 0; i < init.size(); ++i) {
      const std::string f = s.field("initial") + "[" + std::to_string(i) + "]";
      if (!init[i].IsSequence() || init[i].size() != 2) throw ConfigError(f, "expected [n_A, n_a]", line_of(init[i]));
      const Vec2 v{Section::as_number(init[i][0], f), Section::as_number(init[i][1], f)};
      if (v[0] < 0.0 || v[1] < 0.0) throw ConfigError(f, "densities must be nonnegative", line_of(init[i]));
      ode.initial.push_back(v);
    }
  }
  ode.t_end = positive(s.number("t_end", ode.t_end), s.field("t_end"));
  ode.samples = s.count("samples", ode.samples);
  if (ode.samples < 2) throw ConfigError(s.field("samples"), "need at least 2 samples");
  ode.rtol = positive(s.number("rtol", ode.rtol), s.field("rtol"));
  ode.atol = positive(s.number("atol", ode.atol), s.field("atol"));
  ode.basin = s.flag("basin", ode.basin);
  ode.basin_offset = positive(s.number("basin_offset", ode.basin_offset), s.field("basin_offset"));
  s.finish();
}

void parse_oracle(Section& s, OracleExperiment& o) {
  if (!s.present()) return;
  o.b = positive(s.number("b", o.b), s.field("b"));
  o.d = positive(s.number("d", o.d), s.field("d"));
  if (!(o.b > o.d)) throw ConfigError(s.field("b"), "oracle checks need b > d");
  std::vector<double> starts = s.numbers("starts", {});
  if (!starts.empty()) {
    o.starts.clear();
    for (double v : starts) {
      if (v < 1.0 || v != std::floor(v)) throw ConfigError(s.field("starts"), "expected positive integers");
      o.starts.push_back(static_cast<std::int64_t>(v));
    }
  }
  o.t = positive(s.number("t", o.t), s.field("t"));
  o.hit_upper = static_cast<std::int64_t>(s.count("hit_upper", static_cast<std::uint64_t>(o.hit_upper)));
  for (auto i : o.starts) {
    if (o.hit_upper <= i) throw ConfigError(s.field("hit_upper"), "must exceed every start");
  }
  o.slope_N = static_cast<std::int64_t>(s.count("slope_N", static_cast<std::uint64_t>(o.slope_N)));
  if (o.slope_N < 2) throw ConfigError(s.field("slope_N"), "must be at least 2");
  o.gem_b = positive(s.number("gem_b", o.gem_b), s.field("gem_b"));
  o.gem_d = s.number("gem_d", o.gem_d);
  if (!(o.gem_d >= 0.0 && o.gem_d < o.gem_b)) throw ConfigError(s.field("gem_d"), "need 0 <= gem_d < gem_b");
  o.immigration = positive(s.number("immigration", o.immigration), s.field("immigration"));
  o.gem_time = positive(s.number("gem_time", o.gem_time), s.field("gem_time"));
  o.gaps = s.numbers("gaps", o.gaps);
  for (double g : o.gaps) positive(g, s.field("gaps"));
  o.coupled_horizon = positive(s.number("coupled_horizon", o.coupled_horizon), s.field("coupled_horizon"));
  o.logistic_K = positive(s.number("logistic_K", o.logistic_K), s.field("logistic_K"));
  o.logistic_eta = positive(s.number("logistic_eta", o.logistic_eta), s.field("logistic_eta"));
  o.logistic_horizon = s.number("logistic_horizon", o.logistic_horizon);
  if (o.logistic_horizon < 0.0) throw ConfigError(s.field("logistic_horizon"), "must be nonnegative");
  s.finish();
}

}  // namespace

ConfigError::ConfigError(const std::string& field, const std::string& message, int line)
    : std::runtime_error(located(field, message, line)), field_(field), line_(line) {}

RunConfig parse_config_text(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("<document>", e.msg, e.mark.line >= 0 ? e.mark.line + 1 : -1);
  }
  if (!root || root.IsNull()) throw ConfigError("<document>", "configuration is empty");
  if (!root.IsMap()) throw ConfigError("<document>", "top level must be a mapping", line_of(root));

  RunConfig cfg;
  Section top(root, "");
  cfg.seed = top.count("seed", cfg.seed);
  Section regime = top.child("regime");
  cfg.regime = parse_regime(regime);
  Section ecology = top.child("ecology");
  parse_ecology(ecology, cfg);

  Section exp = top.child("experiment");
  if (exp.present()) {
    cfg.replicates = exp.count("replicates", cfg.replicates);
    cfg.epsilon = exp.optional_number("epsilon");
    if (cfg.epsilon && !(*cfg.epsilon > 0.0)) throw ConfigError(exp.field("epsilon"), "must be positive");
    cfg.max_events = exp.count("max_events", cfg.max_events);
    cfg.max_time = exp.optional_number("max_time");
    if (cfg.max_time && !(*cfg.max_time > 0.0)) throw ConfigError(exp.field("max_time"), "must be positive");
    cfg.override_conditions = exp.flag("override_conditions", false);
    cfg.ranks = exp.count("ranks", cfg.ranks);
    cfg.out_dir = exp.text("out_dir");
    Section ode = exp.child("ode");
    parse_ode(ode, cfg.ode);
    Section oracle = exp.child("oracle");
    parse_oracle(oracle, cfg.oracle);
    exp.finish();
  }
  top.finish();
  cfg.resolved = to_json(root);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

MutationRates ode_rates(const RunConfig& config) {
  if (!std::holds_alternative<Regime4>(config.regime)) return {};
  return {lambda_Aa(config.regime), lambda_aA(config.regime)};
}

}  // namespace softsweep::cli
