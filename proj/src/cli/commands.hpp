#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace modcop::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kIo = 2, kFailed = 3 };

struct RunConfig {
  std::string command;
  std::vector<std::string> generators;  ///< verify accepts several; other commands use the first
  std::optional<int> dimension;
  std::string signs;                    ///< bit string such as "010"
  std::optional<std::size_t> n;
  std::optional<int> resolution;
  std::optional<std::uint64_t> seed;    ///< unset: each command's default
  double tolerance = 1e-12;
  double interval_lo = 0.45;
  double interval_hi = 0.55;
  double threshold = 1e6;
  std::vector<std::string> checks;
  std::string inject;
  std::string out;                      ///< empty or "-" for stdout
};

/// Runs one command. Normal output goes to the file named by config.out, or
/// to `out` if none; diagnostics go to `err`. Returns an ExitCode.
int run_command(const RunConfig& config, std::ostream& out, std::ostream& err);

int cmd_sample(const RunConfig& config, std::ostream& out);
int cmd_density_grid(const RunConfig& config, std::ostream& out);
int cmd_generator_plot(const RunConfig& config, std::ostream& out);
int cmd_rho(const RunConfig& config, std::ostream& out);
int cmd_verify(const RunConfig& config, std::ostream& out);
int cmd_probe(const RunConfig& config, std::ostream& out);

/// Parses "a,b" into two reals.
std::pair<double, double> parse_interval(const std::string& text);

}  // namespace modcop::cli
