#ifndef SOFTSWEEP_TOOLS_COMMANDS_HPP
#define SOFTSWEEP_TOOLS_COMMANDS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace softsweep::cli {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicates;
  std::size_t workers = 1;
  std::optional<std::string> out_dir;
};

/// Output directory: flag, then SOFTSWEEP_OUT_DIR, then experiment.out_dir,
/// then the working directory.
std::string resolve_out_dir(const RunConfig& config, const Overrides& overrides);

/// Each command writes its files under the output directory and returns the
/// paths written.
std::vector<std::string> cmd_sweep(RunConfig config, const Overrides& overrides);
std::vector<std::string> cmd_spectrum(RunConfig config, const Overrides& overrides);
std::vector<std::string> cmd_duration(RunConfig config, const Overrides& overrides);
std::vector<std::string> cmd_ode(RunConfig config, const Overrides& overrides);
std::vector<std::string> cmd_oracle(RunConfig config, const Overrides& overrides);

/// Command-line entry point. Exit code 0 on success, 2 for configuration
/// errors, 1 for anything else.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace softsweep::cli

#endif  // SOFTSWEEP_TOOLS_COMMANDS_HPP
