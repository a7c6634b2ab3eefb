#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace modcop {

struct CheckOutcome {
  std::string check;
  std::string generator;
  int dimension = 0;  ///< 0 for checks on the generator alone
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  std::vector<std::string> generators;  ///< empty: default_battery()
  std::vector<int> dimensions = {2, 3};
  std::vector<int> signs;               ///< applied to dimensions of matching length
  std::vector<std::string> checks;      ///< empty: every check
  std::string inject;                   ///< name of a perturbation, empty for none
  std::size_t samples = 100000;
  std::size_t chi_square_draws = 1000000;
  std::size_t mc_samples = 20000;
  std::uint64_t seed = 12345;
  double tolerance = 1e-12;
  std::function<void(const CheckOutcome&)> on_result;
};

struct VerifyReport {
  std::vector<CheckOutcome> outcomes;
  bool all_passed() const;
  std::vector<std::string> failed_checks() const;
};

/// uniform, piecewise:10, triangular, three betas and pathology:50.
std::vector<std::string> default_battery();

/// Every check, in execution order.
std::vector<std::string> check_names();

/// Every injectable perturbation: one per check plus "negate-weight".
std::vector<std::string> injection_names();

/// Runs the selected checks over the battery. Throws ParseError for an
/// unknown check, injection or generator spec.
VerifyReport run_verification(const VerifyOptions& options);

}  // namespace modcop
