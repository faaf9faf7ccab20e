#ifndef SOFTSWEEP_TOOLS_CONFIG_HPP
#define SOFTSWEEP_TOOLS_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "softsweep/model.hpp"
#include "softsweep/ode.hpp"

namespace softsweep::cli {

/// Configuration problem located at a field path and, when known, a line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& message, int line = -1);
  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

struct OdeExperiment {
  std::vector<Vec2> initial;  // trajectories to integrate
  double t_end = 1000.0;
  std::size_t samples = 201;
  double rtol = 1e-9;
  double atol = 1e-12;
  bool basin = true;          // perturb saddles along their unstable direction
  double basin_offset = 1e-6;
};

struct OracleExperiment {
  double b = 2.0;
  double d = 1.0;
  std::vector<std::int64_t> starts{1, 3};
  double t = 1.0;              // time of the extinction-CDF check
  std::int64_t hit_upper = 10;  // k of the hitting-probability check
  std::int64_t slope_N = 10000;  // level of the conditioned hitting-time check
  double gem_b = 5.0;           // GEM oracle: per-capita birth and death
  double gem_d = 3.0;
  double immigration = 1.0;     // GEM oracle: immigration rate
  double gem_time = 3.0;
  std::vector<double> gaps{0.01, 0.02, 0.05, 0.1};
  double coupled_horizon = 3.0;
  double logistic_K = 500.0;
  double logistic_eta = 0.3;
  double logistic_horizon = 100.0;
};

struct RunConfig {
  std::uint64_t seed = 1;
  EcoParams ecology;
  std::vector<double> K;
  MutationRegime regime = Regime2{};
  std::size_t replicates = 100;
  std::optional<double> epsilon;
  std::uint64_t max_events = 500'000'000;
  std::optional<double> max_time;
  bool override_conditions = false;
  std::size_t ranks = 10;
  std::optional<std::string> out_dir;
  OdeExperiment ode;
  OracleExperiment oracle;
  nlohmann::json resolved;  // the parsed document, for provenance
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

/// Mutation rates used by the deterministic system: the regime-4 constants,
/// zero for the other scalings.
MutationRates ode_rates(const RunConfig& config);

}  // namespace softsweep::cli

#endif  // SOFTSWEEP_TOOLS_CONFIG_HPP
