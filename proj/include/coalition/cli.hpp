#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

/// Command-line front end: `chain`, `optimize`, `simulate` and `validate`.
///
/// Every command reads its parameters from defaults, then the matching
/// section of an optional JSON config file, then command-line flags, in
/// increasing precedence.
namespace coalition::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitValidationFailure = 2;

struct ChainConfig {
  std::string model = "fcn";  ///< fcn | pcn
  int m = 0;                  ///< network size, required for pcn
  int n = 5;
  double t = 1.0;
  std::string out;
};

struct OptimizeConfig {
  int m = 25;
  std::string cost = "fixed";  ///< fixed | proportional
  double rc = 0.01;
  double alpha = 0.01;
  double snr_db_start = -10.0;
  double snr_db_stop = 30.0;
  double snr_db_step = 2.0;
  std::vector<double> snr_db_points;  ///< overrides start/stop/step when set
  std::optional<double> y;            ///< single point, linear SNR
  std::optional<double> y_bar;
  double y_bar_ratio = 0.1;           ///< y_bar = ratio * y when y_bar is unset
  std::string mode = "deterministic"; ///< deterministic | placement
  int runs = 200;                     ///< placement mode networks per point
  double width = 100.0;
  double height = 100.0;
  double d_max = 10.0;
  double eta = 3.5;
  std::uint64_t seed = 1;
  std::string out;
};

struct SimulateConfig {
  std::string model = "fcn";  ///< fcn | pcn | geometric
  int m = 10;
  int n = 5;
  double t = 1.0;
  std::string proposer = "a";  ///< a..d or above-own | max | within-delta | random
  std::string acceptor = "e";  ///< e..h or above-own | max | within-delta | experiential
  int delta = 1;
  std::string repr = "head";   ///< head | sum
  std::uint64_t runs = 20000;
  std::uint64_t max_rounds = 1'000'000;
  std::uint64_t seed = 1;
  double signaling_rate = 0.0;
  double width = 100.0;
  double height = 100.0;
  double d_max = 10.0;
  double eta = 3.5;
  double noise = 1e-4;
  double arrival_prob = 0.0;
  double departure_prob = 0.0;
  unsigned threads = 0;
  std::string network;      ///< fixed network CSV (geometric)
  std::string network_out;  ///< dump of run 0's network (geometric)
  std::string trace;        ///< event log of run 0
  std::string out;
};

struct ValidateConfig {
  std::vector<std::string> suites;
  std::string inject_fault;  ///< "" or "pcn-closed-form"
  std::uint64_t runs = 20000;
  std::uint64_t seed = 20240601;
  std::string out;
};

void to_json(nlohmann::json& j, const ChainConfig& c);
void from_json(const nlohmann::json& j, ChainConfig& c);
void to_json(nlohmann::json& j, const OptimizeConfig& c);
void from_json(const nlohmann::json& j, OptimizeConfig& c);
void to_json(nlohmann::json& j, const SimulateConfig& c);
void from_json(const nlohmann::json& j, SimulateConfig& c);
void to_json(nlohmann::json& j, const ValidateConfig& c);
void from_json(const nlohmann::json& j, ValidateConfig& c);

/// Each returns an exit code. Config problems throw ConfigError.
int cmd_chain(const ChainConfig& config, std::ostream& out);
int cmd_optimize(const OptimizeConfig& config, std::ostream& out);
int cmd_simulate(const SimulateConfig& config, std::ostream& out);
int cmd_validate(const ValidateConfig& config, std::ostream& out);

/// Parses `args` (without the program name), dispatches, and maps errors to
/// exit codes. Messages go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace coalition::cli
