#include <set>
#include <string>

#include "coalition/cli.hpp"
#include "coalition/errors.hpp"

namespace coalition::cli {

namespace {

using nlohmann::json;

// Reads the listed keys of a flat section and rejects anything else, so a
// typo in a config file does not silently fall back to a default.
class SectionReader {
 public:
  SectionReader(const json& j, std::string section) : j_(j), section_(std::move(section)) {
    if (!j_.is_object()) throw ConfigError("config section '" + section_ + "' must be an object");
  }

  template <class T>
  SectionReader& field(const char* key, T& value) {
    seen_.insert(key);
    if (const auto it = j_.find(key); it != j_.end()) {
      try {
        it->get_to(value);
      } catch (const json::exception& e) {
        throw ConfigError(section_ + "." + key + ": " + e.what());
      }
    }
    return *this;
  }

  template <class T>
  SectionReader& field(const char* key, std::optional<T>& value) {
    seen_.insert(key);
    if (const auto it = j_.find(key); it != j_.end()) {
      if (it->is_null()) {
        value.reset();
      } else {
        T v{};
        try {
          it->get_to(v);
        } catch (const json::exception& e) {
          throw ConfigError(section_ + "." + key + ": " + e.what());
        }
        value = v;
      }
    }
    return *this;
  }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) {
        throw ConfigError("unknown key '" + key + "' in config section '" + section_ + "'");
      }
    }
  }

 private:
  const json& j_;
  std::string section_;
  std::set<std::string> seen_;
};

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

void to_json(json& j, const ChainConfig& c) {
  j = json{{"model", c.model}, {"m", c.m}, {"n", c.n}, {"t", c.t}, {"out", c.out}};
}

void from_json(const json& j, ChainConfig& c) {
  SectionReader(j, "chain")
      .field("model", c.model)
      .field("m", c.m)
      .field("n", c.n)
      .field("t", c.t)
      .field("out", c.out)
      .finish();
}

void to_json(json& j, const OptimizeConfig& c) {
  j = json{{"m", c.m},
           {"cost", c.cost},
           {"rc", c.rc},
           {"alpha", c.alpha},
           {"snr_db_start", c.snr_db_start},
           {"snr_db_stop", c.snr_db_stop},
           {"snr_db_step", c.snr_db_step},
           {"snr_db_points", c.snr_db_points},
           {"y", optional_json(c.y)},
           {"y_bar", optional_json(c.y_bar)},
           {"y_bar_ratio", c.y_bar_ratio},
           {"mode", c.mode},
           {"runs", c.runs},
           {"width", c.width},
           {"height", c.height},
           {"d_max", c.d_max},
           {"eta", c.eta},
           {"seed", c.seed},
           {"out", c.out}};
}

void from_json(const json& j, OptimizeConfig& c) {
  SectionReader(j, "optimize")
      .field("m", c.m)
      .field("cost", c.cost)
      .field("rc", c.rc)
      .field("alpha", c.alpha)
      .field("snr_db_start", c.snr_db_start)
      .field("snr_db_stop", c.snr_db_stop)
      .field("snr_db_step", c.snr_db_step)
      .field("snr_db_points", c.snr_db_points)
      .field("y", c.y)
      .field("y_bar", c.y_bar)
      .field("y_bar_ratio", c.y_bar_ratio)
      .field("mode", c.mode)
      .field("runs", c.runs)
      .field("width", c.width)
      .field("height", c.height)
      .field("d_max", c.d_max)
      .field("eta", c.eta)
      .field("seed", c.seed)
      .field("out", c.out)
      .finish();
}

void to_json(json& j, const SimulateConfig& c) {
  j = json{{"model", c.model},
           {"m", c.m},
           {"n", c.n},
           {"t", c.t},
           {"proposer", c.proposer},
           {"acceptor", c.acceptor},
           {"delta", c.delta},
           {"repr", c.repr},
           {"runs", c.runs},
           {"max_rounds", c.max_rounds},
           {"seed", c.seed},
           {"signaling_rate", c.signaling_rate},
           {"width", c.width},
           {"height", c.height},
           {"d_max", c.d_max},
           {"eta", c.eta},
           {"noise", c.noise},
           {"arrival_prob", c.arrival_prob},
           {"departure_prob", c.departure_prob},
           {"threads", c.threads},
           {"network", c.network},
           {"network_out", c.network_out},
           {"trace", c.trace},
           {"out", c.out}};
}

void from_json(const json& j, SimulateConfig& c) {
  SectionReader(j, "simulate")
      .field("model", c.model)
      .field("m", c.m)
      .field("n", c.n)
      .field("t", c.t)
      .field("proposer", c.proposer)
      .field("acceptor", c.acceptor)
      .field("delta", c.delta)
      .field("repr", c.repr)
      .field("runs", c.runs)
      .field("max_rounds", c.max_rounds)
      .field("seed", c.seed)
      .field("signaling_rate", c.signaling_rate)
      .field("width", c.width)
      .field("height", c.height)
      .field("d_max", c.d_max)
      .field("eta", c.eta)
      .field("noise", c.noise)
      .field("arrival_prob", c.arrival_prob)
      .field("departure_prob", c.departure_prob)
      .field("threads", c.threads)
      .field("network", c.network)
      .field("network_out", c.network_out)
      .field("trace", c.trace)
      .field("out", c.out)
      .finish();
}

void to_json(json& j, const ValidateConfig& c) {
  j = json{{"suites", c.suites},
           {"inject_fault", c.inject_fault},
           {"runs", c.runs},
           {"seed", c.seed},
           {"out", c.out}};
}

void from_json(const json& j, ValidateConfig& c) {
  SectionReader(j, "validate")
      .field("suites", c.suites)
      .field("inject_fault", c.inject_fault)
      .field("runs", c.runs)
      .field("seed", c.seed)
      .field("out", c.out)
      .finish();
}

}  // namespace coalition::cli
