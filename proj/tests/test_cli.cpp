#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "coalition/cli.hpp"

using namespace coalition::cli;
using nlohmann::json;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream fields(line);
    while (std::getline(fields, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("coalition_cli_test_" + name);
}

}  // namespace

TEST_CASE("chain: fully correlated summary") {
  const auto r = invoke({"chain", "--model", "fcn", "--n", "5", "--t", "1"});
  REQUIRE(r.code == kExitOk);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 7);
  CHECK(rows[0][0] == "kind");
  CHECK(rows[0].size() == 10);
  CHECK(rows[1][1] == "5");
  CHECK(rows[5][1] == "1");
  CHECK(rows[6][0] == "summary");
  CHECK(std::stod(rows[6][8]) == doctest::Approx(12.1667).epsilon(1e-5));
}

TEST_CASE("chain: partially correlated summary and bounds") {
  const auto r = invoke({"chain", "--model", "pcn", "--m", "10", "--n", "3", "--t", "1"});
  REQUIRE(r.code == kExitOk);
  const auto rows = parse_csv(r.out);
  CHECK(std::abs(std::stod(rows.back()[8]) - 143.047) < 0.01);
  CHECK(std::stod(rows[1][4]) == doctest::Approx(0.97));
  CHECK(std::stod(rows[1][5]) == doctest::Approx(0.9775));
}

TEST_CASE("chain: N exceeds M") {
  const auto r = invoke({"chain", "--model", "pcn", "--m", "2", "--n", "5"});
  CHECK(r.code != 0);
  CHECK(r.err.find("N exceeds M") != std::string::npos);
}

TEST_CASE("optimize: single point") {
  const auto r = invoke({"optimize", "--m", "25", "--cost", "fixed", "--rc", "0.01", "--y", "10",
                         "--y-bar", "1"});
  REQUIRE(r.code == kExitOk);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"snr_db", "n_opt", "rate_opt", "rate_singleton",
                                            "infeasible"});
  CHECK(rows[1][1] == "2");
  CHECK(std::abs(std::stod(rows[1][2]) - 0.38624) < 1e-5);
  CHECK(std::abs(std::stod(rows[1][3]) - 0.35022) < 1e-5);

  const auto low = invoke({"optimize", "--m", "10", "--rc", "0", "--y", "1", "--y-bar", "1"});
  CHECK(parse_csv(low.out)[1][1] == "1");
}

TEST_CASE("optimize: sweep rows never lose to the singleton") {
  const auto r = invoke({"optimize", "--m", "25", "--snr-db-start", "-10", "--snr-db-stop", "30",
                         "--snr-db-step", "5"});
  REQUIRE(r.code == kExitOk);
  const auto rows = parse_csv(r.out);
  CHECK(rows.size() == 10);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (rows[k][4] == "1") continue;
    CHECK(std::stod(rows[k][2]) >= std::stod(rows[k][3]));
  }
}

TEST_CASE("optimize: infeasible points are flagged") {
  const auto r = invoke({"optimize", "--m", "10", "--y", "1000", "--y-bar", "1"});
  REQUIRE(r.code == kExitOk);
  const auto rows = parse_csv(r.out);
  CHECK(rows[1][1] == "1");
  CHECK(rows[1][4] == "1");
}

TEST_CASE("optimize: grid validation") {
  CHECK(invoke({"optimize", "--snr-db-step", "0"}).code == kExitConfigError);
  CHECK(invoke({"optimize", "--snr-db-start", "10", "--snr-db-stop", "0"}).code ==
        kExitConfigError);
  CHECK(invoke({"optimize", "--snr-db-points", "0", "0"}).code == kExitConfigError);
  CHECK(invoke({"optimize", "--cost", "free"}).code == kExitConfigError);
  CHECK(invoke({"optimize", "--mode", "other"}).code == kExitConfigError);
}

TEST_CASE("optimize: placement mode columns") {
  const auto r = invoke({"optimize", "--mode", "placement", "--runs", "5", "--m", "10",
                         "--snr-db-points", "0", "10"});
  REQUIRE(r.code == kExitOk);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"snr_db", "mean_n_opt", "mean_rate_opt",
                                            "mean_rate_singleton", "infeasible_fraction"});
}

TEST_CASE("simulate: abstract FCN agrees with the chain") {
  const auto r = invoke({"simulate", "--model", "fcn", "--n", "5", "--runs", "20000", "--seed",
                         "1"});
  REQUIRE(r.code == kExitOk);
  const auto rows = parse_csv(r.out);
  CHECK(rows[0] == std::vector<std::string>{"kind", "level", "count", "empirical", "model",
                                            "std_error", "z_score"});
  int levels = 0;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (rows[k][0] == "level") {
      ++levels;
      CHECK(std::abs(std::stod(rows[k][6])) < 3.0);
    }
    if (rows[k][0] == "mean_rounds") CHECK(std::abs(std::stod(rows[k][6])) < 3.0);
  }
  CHECK(levels == 4);
}

TEST_CASE("simulate: deterministic given the seed") {
  const std::vector<std::string> args{"simulate", "--model", "pcn", "--m", "8", "--n", "4",
                                      "--runs", "300", "--seed", "5"};
  CHECK(invoke(args).out == invoke(args).out);
  auto threaded = args;
  threaded.insert(threaded.end(), {"--threads", "3"});
  CHECK(invoke(threaded).out == invoke(args).out);
}

TEST_CASE("simulate: geometric report with trace and network files") {
  const auto trace = temp_file("trace.csv");
  const auto network = temp_file("network.csv");
  const auto r = invoke({"simulate", "--model", "geometric", "--m", "10", "--n", "5", "--runs",
                         "20", "--max-rounds", "500", "--width", "30", "--height", "30",
                         "--trace", trace.string(), "--network-out", network.string()});
  REQUIRE(r.code == kExitOk);
  const auto rows = parse_csv(r.out);
  bool has_model_column = false;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (rows[k][0] == "level" && !rows[k][4].empty()) has_model_column = true;
  }
  CHECK(has_model_column);

  std::ifstream t(trace);
  std::string header;
  std::getline(t, header);
  CHECK(header == "round,level_before,event,initiator,target,level_after");

  const auto replay = invoke({"simulate", "--model", "geometric", "--network", network.string(),
                              "--n", "5", "--runs", "10", "--max-rounds", "500"});
  CHECK(replay.code == kExitOk);
  std::filesystem::remove(trace);
  std::filesystem::remove(network);
}

TEST_CASE("simulate: config errors") {
  CHECK(invoke({"simulate", "--model", "pcn", "--m", "2", "--n", "5"}).code == kExitConfigError);
  CHECK(invoke({"simulate", "--proposer", "z"}).code == kExitConfigError);
  CHECK(invoke({"simulate", "--acceptor", "h"}).code == kExitConfigError);
  CHECK(invoke({"simulate", "--runs", "0"}).code == kExitConfigError);
  CHECK(invoke({"simulate", "--arrival-prob", "2"}).code == kExitConfigError);
  CHECK(invoke({"simulate", "--model", "fcn", "--network-out", "x.csv", "--runs", "1"}).code ==
        kExitConfigError);
}

TEST_CASE("validate: default run passes and lists every suite") {
  const auto r = invoke({"validate", "--runs", "5000"});
  CHECK(r.code == kExitOk);
  for (const char* suite : {"chain.", "rate.", "netsim.", "cfp."}) {
    CHECK(r.out.find(suite) != std::string::npos);
  }
  CHECK(r.out.find("FAIL") == std::string::npos);
}

TEST_CASE("validate: suite filter and injected fault") {
  const auto chain_only = invoke({"validate", "--suite", "chain"});
  CHECK(chain_only.code == kExitOk);
  CHECK(chain_only.out.find("rate.") == std::string::npos);

  const auto faulty = invoke({"validate", "--suite", "chain", "--inject-fault", "pcn-closed-form"});
  CHECK(faulty.code == kExitValidationFailure);
  CHECK(faulty.out.find("FAIL chain.pcn_binomial_average_matches_closed_form") !=
        std::string::npos);

  CHECK(invoke({"validate", "--suite", "bogus"}).code == kExitConfigError);
  CHECK(invoke({"validate", "--inject-fault", "other"}).code == kExitConfigError);
}

TEST_CASE("config file precedence and round trip") {
  const auto path = temp_file("config.json");
  {
    std::ofstream f(path);
    f << R"({"chain": {"model": "pcn", "m": 10, "n": 4}, "simulate": {"runs": 7}})";
  }
  const auto from_file = invoke({"chain", "--config", path.string(), "--dump-config"});
  REQUIRE(from_file.code == kExitOk);
  const auto dumped = json::parse(from_file.out);
  CHECK(dumped["chain"]["model"] == "pcn");
  CHECK(dumped["chain"]["n"] == 4);
  CHECK(dumped["chain"]["t"] == 1.0);

  const auto overridden = invoke({"chain", "--config", path.string(), "--n", "3", "--dump-config"});
  CHECK(json::parse(overridden.out)["chain"]["n"] == 3);

  // Re-emitting a dumped config reproduces it.
  {
    std::ofstream f(path);
    f << from_file.out;
  }
  const auto again = invoke({"chain", "--config", path.string(), "--dump-config"});
  CHECK(json::parse(again.out) == dumped);

  for (const auto& [name, section] :
       {std::pair<std::string, std::string>{"optimize", "optimize"}, {"simulate", "simulate"},
        {"validate", "validate"}}) {
    const auto first = invoke({name, "--dump-config"});
    {
      std::ofstream f(path);
      f << first.out;
    }
    const auto second = invoke({name, "--config", path.string(), "--dump-config"});
    CHECK(json::parse(second.out) == json::parse(first.out));
    CHECK(json::parse(first.out).contains(section));
  }
  std::filesystem::remove(path);
}

TEST_CASE("config structs round-trip through JSON") {
  OptimizeConfig opt;
  opt.y = 3.0;
  opt.snr_db_points = {1.0, 2.0};
  const json j = opt;
  const auto back = j.get<OptimizeConfig>();
  CHECK(back.y == opt.y);
  CHECK_FALSE(back.y_bar.has_value());
  CHECK(back.snr_db_points == opt.snr_db_points);

  SimulateConfig sim;
  sim.seed = 0xFFFFFFFFFFFFFFFFull;
  CHECK(json(sim).get<SimulateConfig>().seed == sim.seed);
}

TEST_CASE("config errors") {
  const auto path = temp_file("bad.json");
  {
    std::ofstream f(path);
    f << R"({"chain": {"n": 4, "bogus": 1}})";
  }
  auto r = invoke({"chain", "--config", path.string()});
  CHECK(r.code == kExitConfigError);
  CHECK(r.err.find("bogus") != std::string::npos);
  {
    std::ofstream f(path);
    f << R"({"plot": {}})";
  }
  CHECK(invoke({"chain", "--config", path.string()}).code == kExitConfigError);
  {
    std::ofstream f(path);
    f << R"({"chain": {"n": "five"}})";
  }
  CHECK(invoke({"chain", "--config", path.string()}).code == kExitConfigError);
  {
    std::ofstream f(path);
    f << "{not json";
  }
  CHECK(invoke({"chain", "--config", path.string()}).code == kExitConfigError);
  std::filesystem::remove(path);

  CHECK(invoke({"chain", "--config", "/nonexistent/config.json"}).code == kExitConfigError);
  CHECK(invoke({}).code == kExitConfigError);
  CHECK(invoke({"frobnicate"}).code == kExitConfigError);
  CHECK(invoke({"chain", "--n", "abc"}).code == kExitConfigError);
  CHECK(invoke({"chain", "--model", "xyz"}).code == kExitConfigError);
  CHECK(invoke({"--help"}).code == kExitOk);
}

TEST_CASE("output file") {
  const auto path = temp_file("chain.csv");
  const auto r = invoke({"chain", "--n", "3", "--out", path.string()});
  CHECK(r.code == kExitOk);
  CHECK(r.out.empty());
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind("kind,level,stay,advance", 0) == 0);
  std::filesystem::remove(path);
}
