#include <cmath>
#include <deque>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "coalition/cfp_engine.hpp"
#include "coalition/chain_model.hpp"
#include "coalition/cli.hpp"
#include "coalition/errors.hpp"
#include "coalition/netsim.hpp"
#include "coalition/rate_model.hpp"
#include "coalition/validation.hpp"

namespace coalition::cli {

namespace {

using nlohmann::json;
using netsim::LinkId;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kInjectedFault = 1e-6;

// Writes to `path`, or to `fallback` when the path is empty.
template <class Fn>
void with_output(const std::string& path, std::ostream& fallback, Fn&& fn) {
  if (path.empty()) {
    fn(fallback);
    return;
  }
  std::ofstream file(path);
  if (!file) throw ConfigError("cannot open output file '" + path + "'");
  fn(static_cast<std::ostream&>(file));
  if (!file) throw ConfigError("failed writing output file '" + path + "'");
}

void prepare(std::ostream& out) {
  out << std::setprecision(10);
}

// Empty cell for absent values keeps the CSV numeric where it matters.
std::string cell(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

double z_score(double empirical, double model, double se) {
  if (std::isnan(model)) return kNan;
  if (se > 0.0) return (empirical - model) / se;
  return empirical == model ? 0.0 : kNan;
}

// ---------------------------------------------------------------- chain

chain::VisibilityModel chain_model_of(const ChainConfig& c) {
  if (c.model == "fcn") return chain::FullyCorrelated{};
  if (c.model == "pcn") {
    if (c.m < 1) throw ConfigError("pcn model needs --m >= 1");
    return chain::PartiallyCorrelated{c.m};
  }
  throw ConfigError("unknown chain model '" + c.model + "' (expected fcn or pcn)");
}

// ------------------------------------------------------------- optimize

rate::SignalingCost cost_of(const OptimizeConfig& c) {
  if (c.cost == "fixed") return rate::FixedCost{c.rc};
  if (c.cost == "proportional") return rate::ProportionalCost{c.alpha};
  throw ConfigError("unknown cost mode '" + c.cost + "' (expected fixed or proportional)");
}

std::vector<double> snr_grid(const OptimizeConfig& c) {
  std::vector<double> grid;
  if (!c.snr_db_points.empty()) {
    grid = c.snr_db_points;
  } else {
    if (!std::isfinite(c.snr_db_start) || !std::isfinite(c.snr_db_stop) ||
        !std::isfinite(c.snr_db_step) || !(c.snr_db_step > 0.0)) {
      throw ConfigError("SNR grid needs finite start/stop and a positive step");
    }
    if (c.snr_db_stop < c.snr_db_start) {
      throw ConfigError("SNR grid stop must not be below start");
    }
    const auto count = static_cast<long>(
        std::floor((c.snr_db_stop - c.snr_db_start) / c.snr_db_step + 1e-9));
    for (long k = 0; k <= count; ++k) grid.push_back(c.snr_db_start + k * c.snr_db_step);
  }
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!std::isfinite(grid[k])) throw ConfigError("SNR grid points must be finite");
    if (k > 0 && !(grid[k] > grid[k - 1])) {
      throw ConfigError("SNR grid points must be strictly increasing");
    }
  }
  return grid;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// Noise level and mean interferer SNR of one generated network. The noise is
// set so that the mean direct-link SNR in dB equals `target_db`; y_bar is the
// geometric mean of the cross-link SNRs at that noise level.
double placement_y_bar(const netsim::Network& net, double target_db) {
  const std::size_t m = net.size();
  double direct_db = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    direct_db += 10.0 * std::log10(net.received(static_cast<LinkId>(i), static_cast<LinkId>(i)));
  }
  direct_db /= static_cast<double>(m);
  const double noise_db = direct_db - target_db;
  if (m < 2) return kNan;
  double cross_db = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      cross_db += 10.0 * std::log10(net.received(static_cast<LinkId>(i), static_cast<LinkId>(j)));
    }
  }
  cross_db /= static_cast<double>(m * (m - 1));
  return db_to_linear(cross_db - noise_db);
}

void optimize_deterministic(const OptimizeConfig& c, std::ostream& out) {
  std::vector<std::pair<double, double>> points;  // (snr_db, y)
  if (c.y) {
    points.emplace_back(10.0 * std::log10(*c.y), *c.y);
  } else {
    for (double db : snr_grid(c)) points.emplace_back(db, db_to_linear(db));
  }
  out << "snr_db,n_opt,rate_opt,rate_singleton,infeasible\n";
  for (const auto& [db, y] : points) {
    rate::RateParams params{y, c.y_bar ? *c.y_bar : c.y_bar_ratio * y, c.m, cost_of(c)};
    params.validate();
    try {
      const auto best = rate::optimal_cluster_size(params);
      const double singleton = rate::rate_per_member(params, 1).value_or(kNan);
      out << db << ',' << best.size << ',' << best.rate << ',' << singleton << ",0\n";
    } catch (const InfeasibleNetwork&) {
      out << db << ",1,nan,nan,1\n";
    }
  }
}

void optimize_placement(const OptimizeConfig& c, std::ostream& out) {
  if (c.y || c.y_bar) throw ConfigError("placement mode sweeps SNR; y and y_bar are not used");
  if (c.runs < 1) throw ConfigError("runs must be >= 1");
  netsim::PlacementConfig base;
  base.width = c.width;
  base.height = c.height;
  base.d_max = c.d_max;
  base.path_loss_exponent = c.eta;
  base.validate();

  // The same networks are reused at every grid point.
  std::vector<netsim::Network> networks;
  networks.reserve(static_cast<std::size_t>(c.runs));
  for (int r = 0; r < c.runs; ++r) {
    auto placement = base;
    placement.seed = cfp::derive_seed(c.seed, static_cast<std::uint64_t>(r));
    networks.push_back(netsim::generate_network(c.m, placement));
  }

  out << "snr_db,mean_n_opt,mean_rate_opt,mean_rate_singleton,infeasible_fraction\n";
  for (double db : snr_grid(c)) {
    double sum_n = 0.0;
    double sum_rate = 0.0;
    double sum_single = 0.0;
    int feasible = 0;
    for (const auto& net : networks) {
      rate::RateParams params{db_to_linear(db), placement_y_bar(net, db), c.m, cost_of(c)};
      if (!(params.y_bar > 0.0)) throw ConfigError("placement mode needs M >= 2");
      params.validate();
      try {
        const auto best = rate::optimal_cluster_size(params);
        sum_n += best.size;
        sum_rate += best.rate;
        sum_single += rate::rate_per_member(params, 1).value_or(kNan);
        ++feasible;
      } catch (const InfeasibleNetwork&) {
      }
    }
    const double f = feasible;
    out << db << ',' << (feasible ? sum_n / f : kNan) << ',' << (feasible ? sum_rate / f : kNan)
        << ',' << (feasible ? sum_single / f : kNan) << ','
        << 1.0 - f / static_cast<double>(networks.size()) << '\n';
  }
}

// ------------------------------------------------------------- simulate

cfp::ProposerRule proposer_of(const SimulateConfig& c) {
  if (c.proposer == "a" || c.proposer == "above-own") return cfp::AboveOwnLevel{};
  if (c.proposer == "b" || c.proposer == "max") return cfp::MaxInterferer{};
  if (c.proposer == "c" || c.proposer == "within-delta") return cfp::WithinDelta{c.delta};
  if (c.proposer == "d" || c.proposer == "random") return cfp::RandomTarget{};
  throw ConfigError("unknown proposer rule '" + c.proposer + "' (expected a, b, c or d)");
}

cfp::AcceptorRule acceptor_of(const SimulateConfig& c) {
  if (c.acceptor == "e" || c.acceptor == "above-own") return cfp::AboveOwnLevel{};
  if (c.acceptor == "f" || c.acceptor == "max") return cfp::MaxInterferer{};
  if (c.acceptor == "g" || c.acceptor == "within-delta") return cfp::WithinDelta{c.delta};
  if (c.acceptor == "h" || c.acceptor == "experiential") return cfp::Experiential{};
  throw ConfigError("unknown acceptor rule '" + c.acceptor + "' (expected e, f, g or h)");
}

cfp::CoalitionRepresentation repr_of(const SimulateConfig& c) {
  if (c.repr == "head") return cfp::CoalitionRepresentation::HeadLevel;
  if (c.repr == "sum") return cfp::CoalitionRepresentation::SumLevel;
  throw ConfigError("unknown representation '" + c.repr + "' (expected head or sum)");
}

void require_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0, 1]");
}

struct SimulationSetup {
  cfp::MonteCarloConfig mc;
  chain::VisibilityModel reference;  // analytical comparison model
};

SimulationSetup simulation_setup(const SimulateConfig& c) {
  if (c.runs < 1) throw ConfigError("runs must be >= 1");
  if (c.max_rounds < 1) throw ConfigError("max_rounds must be >= 1");
  if (!(c.t > 0.0)) throw ConfigError("round duration t must be > 0");
  if (c.delta < 0) throw ConfigError("delta must be >= 0");
  if (!(c.signaling_rate >= 0.0)) throw ConfigError("signaling_rate must be >= 0");
  require_probability(c.arrival_prob, "arrival_prob");
  require_probability(c.departure_prob, "departure_prob");

  SimulationSetup s;
  s.mc.cluster_size = c.n;
  s.mc.rules = cfp::Rules{proposer_of(c), acceptor_of(c)};
  s.mc.repr = repr_of(c);
  s.mc.runs = c.runs;
  s.mc.max_rounds = c.max_rounds;
  s.mc.seed = c.seed;
  s.mc.dynamics = cfp::Dynamics{c.arrival_prob, c.departure_prob};
  s.mc.threads = c.threads;

  if (c.model == "fcn") {
    s.mc.model = cfp::AbstractModel{chain::FullyCorrelated{}};
    s.reference = chain::FullyCorrelated{};
  } else if (c.model == "pcn") {
    s.mc.model = cfp::AbstractModel{chain::PartiallyCorrelated{c.m}};
    s.reference = chain::PartiallyCorrelated{c.m};
  } else if (c.model == "geometric") {
    if (!c.network.empty()) {
      std::ifstream in(c.network);
      if (!in) throw ConfigError("cannot open network file '" + c.network + "'");
      auto net = std::make_shared<const netsim::Network>(netsim::read_network_csv(in, c.eta, c.noise));
      s.reference = chain::PartiallyCorrelated{static_cast<int>(net->size())};
      s.mc.model = cfp::GeometricModel{std::move(net), c.signaling_rate};
    } else {
      netsim::PlacementConfig placement;
      placement.width = c.width;
      placement.height = c.height;
      placement.d_max = c.d_max;
      placement.path_loss_exponent = c.eta;
      placement.noise = c.noise;
      placement.validate();
      if (c.m < 1) throw ConfigError("geometric model needs --m >= 1");
      s.mc.placement = cfp::RandomPlacement{c.m, placement, c.signaling_rate};
      s.reference = chain::PartiallyCorrelated{c.m};
    }
  } else {
    throw ConfigError("unknown simulation model '" + c.model +
                      "' (expected fcn, pcn or geometric)");
  }
  // Fail fast on N/M and rule/model mismatches before spending any runs.
  (void)cfp::init_run(s.mc, 0);
  return s;
}

double model_advance(const chain::VisibilityModel& reference, int level) {
  try {
    return chain::transition(reference, level).advance;
  } catch (const DomainError&) {
    return kNan;
  }
}

void write_simulation_report(std::ostream& out, const SimulateConfig& c,
                             const SimulationSetup& setup, const cfp::RunStats& stats) {
  const bool static_cluster = c.arrival_prob == 0.0 && c.departure_prob == 0.0;
  chain::AbsorptionStats model{kNan, kNan, kNan, kNan};
  if (static_cluster) {
    model = chain::absorption_stats(chain::build_chain(setup.reference, c.n, c.t));
  }

  out << "kind,level,count,empirical,model,std_error,z_score\n";
  for (auto it = stats.transitions.rbegin(); it != stats.transitions.rend(); ++it) {
    const auto& [level, counts] = *it;
    const double expected = model_advance(setup.reference, level);
    const double freq = counts.advance_frequency();
    const double se = counts.standard_error();
    out << "level," << level << ',' << counts.visits() << ',' << freq << ',' << cell(expected)
        << ',' << se << ',' << cell(z_score(freq, expected, se)) << '\n';
  }
  const auto moment_row = [&](const char* kind, double empirical, double expected, double se) {
    out << kind << ",," << stats.completed << ',' << cell(empirical) << ',' << cell(expected)
        << ',' << cell(se) << ',' << cell(z_score(empirical, expected, se)) << '\n';
  };
  const bool any = stats.completed > 0;
  moment_row("mean_rounds", any ? stats.mean_rounds : kNan, model.mean_rounds, stats.se_mean);
  moment_row("var_rounds", any ? stats.var_rounds : kNan, model.var_rounds, stats.se_var);
  moment_row("mean_time", any ? stats.mean_rounds * c.t : kNan, model.mean_time,
             stats.se_mean * c.t);
  out << "timeouts,," << stats.timeouts << ','
      << static_cast<double>(stats.timeouts) / static_cast<double>(stats.samples.size())
      << ",,,\n";
}

// ------------------------------------------------------------ parsing

// Binds `--flag` options to a scratch config and remembers how to copy each
// one that was actually given onto the effective config.
template <class C>
class Binder {
 public:
  explicit Binder(CLI::App* app) : app_(app) {}
  Binder(const Binder&) = delete;
  Binder& operator=(const Binder&) = delete;

  template <class T>
  Binder& opt(const std::string& key, T C::*field, const std::string& help) {
    auto* option = app_->add_option(flag(key), scratch_.*field, help);
    apply_.emplace_back(option, [this, field](C& c) { c.*field = scratch_.*field; });
    return *this;
  }

  Binder& opt(const std::string& key, std::optional<double> C::*field, const std::string& help) {
    double& slot = optional_slots_.emplace_back(0.0);
    auto* option = app_->add_option(flag(key), slot, help);
    apply_.emplace_back(option, [field, &slot](C& c) { c.*field = slot; });
    return *this;
  }

  template <class T>
  Binder& opt_named(const std::string& name, T C::*field, const std::string& help) {
    auto* option = app_->add_option(name, scratch_.*field, help);
    apply_.emplace_back(option, [this, field](C& c) { c.*field = scratch_.*field; });
    return *this;
  }

  void apply(C& config) const {
    for (const auto& [option, fn] : apply_) {
      if (option->count() > 0) fn(config);
    }
  }

  CLI::App* app() const { return app_; }

 private:
  static std::string flag(std::string key) {
    for (auto& ch : key) {
      if (ch == '_') ch = '-';
    }
    return "--" + key;
  }

  CLI::App* app_;
  C scratch_{};
  std::deque<double> optional_slots_;
  std::vector<std::pair<CLI::Option*, std::function<void(C&)>>> apply_;
};

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  static const std::set<std::string> sections{"chain", "optimize", "simulate", "validate"};
  for (const auto& [key, _] : j.items()) {
    if (!sections.count(key)) throw ConfigError("unknown config section '" + key + "'");
  }
  return j;
}

template <class C>
C effective_config(const std::string& config_path, const char* section, const Binder<C>& binder) {
  C config{};
  if (!config_path.empty()) {
    const json file = load_config_file(config_path);
    if (const auto it = file.find(section); it != file.end()) it->get_to(config);
  }
  binder.apply(config);
  return config;
}

}  // namespace

int cmd_chain(const ChainConfig& c, std::ostream& out) {
  const auto model = chain_model_of(c);
  const auto ch = chain::build_chain(model, c.n, c.t);
  const auto stats = chain::absorption_stats(ch);
  const bool pcn = std::holds_alternative<chain::PartiallyCorrelated>(model);

  with_output(c.out, out, [&](std::ostream& os) {
    prepare(os);
    os << "kind,level,stay,advance,bound_lower,bound_upper,mean_rounds,var_rounds,mean_time,"
          "var_time\n";
    for (const auto& t : ch.transitions) {
      os << "level," << t.level << ',' << t.stay << ',' << t.advance << ',';
      if (pcn) {
        const auto b = chain::pcn_stay_bounds(c.m, t.level);
        os << b.lower << ',' << b.upper;
      } else {
        os << ',';
      }
      os << ",,,,\n";
    }
    os << "level,1,1,0,,,,,,\n";
    os << "summary," << c.n << ",,,,," << stats.mean_rounds << ',' << stats.var_rounds << ','
       << stats.mean_time << ',' << stats.var_time << '\n';
  });
  return kExitOk;
}

int cmd_optimize(const OptimizeConfig& c, std::ostream& out) {
  if (c.m < 1) throw ConfigError("m must be >= 1");
  if (!(c.y_bar_ratio > 0.0)) throw ConfigError("y_bar_ratio must be > 0");
  (void)cost_of(c);
  if (c.mode != "deterministic" && c.mode != "placement") {
    throw ConfigError("unknown optimize mode '" + c.mode + "' (expected deterministic or placement)");
  }
  with_output(c.out, out, [&](std::ostream& os) {
    prepare(os);
    if (c.mode == "deterministic") {
      optimize_deterministic(c, os);
    } else {
      optimize_placement(c, os);
    }
  });
  return kExitOk;
}

int cmd_simulate(const SimulateConfig& c, std::ostream& out) {
  const auto setup = simulation_setup(c);

  if (!c.network_out.empty()) {
    const auto state = cfp::init_run(setup.mc, 0);
    const auto* geo = std::get_if<cfp::GeometricModel>(&state.model());
    if (!geo) throw ConfigError("network_out needs the geometric model");
    with_output(c.network_out, out, [&](std::ostream& os) {
      os << std::setprecision(17);
      netsim::write_network_csv(os, *geo->network);
    });
  }
  if (!c.trace.empty()) {
    auto state = cfp::init_run(setup.mc, 0);
    const auto trace = cfp::run(state, c.max_rounds, setup.mc.dynamics, true);
    with_output(c.trace, out, [&](std::ostream& os) { cfp::write_trace_csv(os, trace); });
  }

  const auto stats = cfp::monte_carlo(setup.mc);
  with_output(c.out, out, [&](std::ostream& os) {
    prepare(os);
    write_simulation_report(os, c, setup, stats);
  });
  return kExitOk;
}

int cmd_validate(const ValidateConfig& c, std::ostream& out) {
  validation::Options options;
  options.suites = c.suites;
  options.runs = c.runs;
  options.seed = c.seed;
  if (c.runs < 1) throw ConfigError("runs must be >= 1");
  if (c.inject_fault == "pcn-closed-form") {
    options.closed_form_fault = kInjectedFault;
  } else if (!c.inject_fault.empty()) {
    throw ConfigError("unknown fault '" + c.inject_fault + "' (expected pcn-closed-form)");
  }

  const auto results = validation::run_checks(options);
  int passed = 0;
  int failed = 0;
  int info = 0;
  with_output(c.out, out, [&](std::ostream& os) {
    for (const auto& r : results) {
      os << validation::to_string(r.status) << ' ' << r.id << ": " << r.detail << '\n';
      switch (r.status) {
        case validation::Status::Pass: ++passed; break;
        case validation::Status::Fail: ++failed; break;
        case validation::Status::Info: ++info; break;
      }
    }
    os << "summary: " << passed << " passed, " << failed << " failed, " << info << " info\n";
  });
  return failed > 0 ? kExitValidationFailure : kExitOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coalition formation for spectrum sharing: chain model, simulator, optimizer",
               "coalition"};
  app.require_subcommand(1);

  std::string config_path;
  bool dump = false;
  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_flag("--dump-config", dump, "print the effective config as JSON and exit");
  };

  auto* chain_app = app.add_subcommand("chain", "transition probabilities and absorption time");
  common(chain_app);
  Binder<ChainConfig> chain_args(chain_app);
  chain_args.opt("model", &ChainConfig::model, "fcn | pcn")
      .opt("m", &ChainConfig::m, "network size M (pcn)")
      .opt("n", &ChainConfig::n, "cluster size N")
      .opt("t", &ChainConfig::t, "round duration T")
      .opt("out", &ChainConfig::out, "output CSV path (default stdout)");

  auto* opt_app = app.add_subcommand("optimize", "optimum cluster size over an SNR sweep");
  common(opt_app);
  Binder<OptimizeConfig> opt_args(opt_app);
  opt_args.opt("m", &OptimizeConfig::m, "network size M")
      .opt("cost", &OptimizeConfig::cost, "fixed | proportional")
      .opt("rc", &OptimizeConfig::rc, "fixed signaling rate per peer")
      .opt("alpha", &OptimizeConfig::alpha, "proportional signaling fraction")
      .opt("snr_db_start", &OptimizeConfig::snr_db_start, "first SNR grid point (dB)")
      .opt("snr_db_stop", &OptimizeConfig::snr_db_stop, "last SNR grid point (dB)")
      .opt("snr_db_step", &OptimizeConfig::snr_db_step, "SNR grid step (dB)")
      .opt("snr_db_points", &OptimizeConfig::snr_db_points, "explicit SNR grid (dB)")
      .opt("y", &OptimizeConfig::y, "single point: linear SNR")
      .opt("y_bar", &OptimizeConfig::y_bar, "linear interferer SNR")
      .opt("y_bar_ratio", &OptimizeConfig::y_bar_ratio, "y_bar = ratio * y when y_bar is unset")
      .opt("mode", &OptimizeConfig::mode, "deterministic | placement")
      .opt("runs", &OptimizeConfig::runs, "networks per grid point (placement)")
      .opt("width", &OptimizeConfig::width, "area width")
      .opt("height", &OptimizeConfig::height, "area height")
      .opt("d_max", &OptimizeConfig::d_max, "max tx-rx distance")
      .opt("eta", &OptimizeConfig::eta, "path-loss exponent")
      .opt("seed", &OptimizeConfig::seed, "master seed")
      .opt("out", &OptimizeConfig::out, "output CSV path (default stdout)");

  auto* sim_app = app.add_subcommand("simulate", "Monte Carlo protocol runs vs the chain model");
  common(sim_app);
  Binder<SimulateConfig> sim_args(sim_app);
  sim_args.opt("model", &SimulateConfig::model, "fcn | pcn | geometric")
      .opt("m", &SimulateConfig::m, "network size M")
      .opt("n", &SimulateConfig::n, "cluster size N")
      .opt("t", &SimulateConfig::t, "round duration T")
      .opt("proposer", &SimulateConfig::proposer, "a | b | c | d")
      .opt("acceptor", &SimulateConfig::acceptor, "e | f | g | h")
      .opt("delta", &SimulateConfig::delta, "position slack of rules c and g")
      .opt("repr", &SimulateConfig::repr, "head | sum")
      .opt("runs", &SimulateConfig::runs, "independent runs")
      .opt("max_rounds", &SimulateConfig::max_rounds, "round cap per run")
      .opt("seed", &SimulateConfig::seed, "master seed")
      .opt("signaling_rate", &SimulateConfig::signaling_rate, "R_S for rule h")
      .opt("width", &SimulateConfig::width, "area width")
      .opt("height", &SimulateConfig::height, "area height")
      .opt("d_max", &SimulateConfig::d_max, "max tx-rx distance")
      .opt("eta", &SimulateConfig::eta, "path-loss exponent")
      .opt("noise", &SimulateConfig::noise, "noise power")
      .opt("arrival_prob", &SimulateConfig::arrival_prob, "per-round arrival probability")
      .opt("departure_prob", &SimulateConfig::departure_prob, "per-round departure probability")
      .opt("threads", &SimulateConfig::threads, "worker threads (0 = all cores)")
      .opt("network", &SimulateConfig::network, "fixed network CSV (geometric)")
      .opt("network_out", &SimulateConfig::network_out, "write run 0's network CSV")
      .opt("trace", &SimulateConfig::trace, "write run 0's event log CSV")
      .opt("out", &SimulateConfig::out, "output CSV path (default stdout)");

  auto* val_app = app.add_subcommand("validate", "run the built-in consistency checks");
  common(val_app);
  Binder<ValidateConfig> val_args(val_app);
  val_args.opt_named("--suite", &ValidateConfig::suites, "suite to run (repeatable)")
      .opt("inject_fault", &ValidateConfig::inject_fault, "harness self-test: pcn-closed-form")
      .opt("runs", &ValidateConfig::runs, "Monte Carlo runs for statistical checks")
      .opt("seed", &ValidateConfig::seed, "master seed")
      .opt("out", &ValidateConfig::out, "report path (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  const auto execute = [&](auto& binder, const char* section, auto command) -> int {
    const auto config = effective_config(config_path, section, binder);
    if (dump) {
      out << json{{section, config}}.dump(2) << '\n';
      return kExitOk;
    }
    return command(config, out);
  };

  try {
    if (chain_app->parsed()) return execute(chain_args, "chain", cmd_chain);
    if (opt_app->parsed()) return execute(opt_args, "optimize", cmd_optimize);
    if (sim_app->parsed()) return execute(sim_args, "simulate", cmd_simulate);
    return execute(val_args, "validate", cmd_validate);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
  } catch (const NonAbsorbingChain& e) {
    err << "error: " << e.what() << '\n';
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const InfeasibleNetwork& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitConfigError;
}

}  // namespace coalition::cli
