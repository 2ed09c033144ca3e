#pragma once

#include <cstdint>
#include <string>
#include <vector>

/// Self-check harness behind `coalition validate`: the module invariants
/// evaluated at desk scale, each against an independent route.
namespace coalition::validation {

enum class Status { Pass, Fail, Info };

struct CheckResult {
  std::string id;  ///< "<suite>.<name>"
  Status status = Status::Pass;
  std::string detail;
};

struct Options {
  std::vector<std::string> suites;  ///< empty = all of chain, rate, netsim, cfp
  std::uint64_t runs = 20000;       ///< Monte Carlo runs for statistical checks
  std::uint64_t seed = 20240601;
  /// Harness self-test: adds this offset to the closed-form partially
  /// correlated acceptance probability before it is compared.
  double closed_form_fault = 0.0;
};

const std::vector<std::string>& suite_names();

/// Runs the selected suites in order. Unknown suite names throw ConfigError.
std::vector<CheckResult> run_checks(const Options& options);

std::string to_string(Status status);

}  // namespace coalition::validation
