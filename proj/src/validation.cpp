#include "coalition/validation.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <boost/rational.hpp>

#include "coalition/cfp_engine.hpp"
#include "coalition/chain_model.hpp"
#include "coalition/netsim.hpp"
#include "coalition/rate_model.hpp"

namespace coalition::validation {

namespace {

using Rational = boost::rational<long long>;

class Recorder {
 public:
  explicit Recorder(std::vector<CheckResult>& out) : out_(out) {}

  void check(std::string id, bool ok, std::string detail) {
    out_.push_back({std::move(id), ok ? Status::Pass : Status::Fail, std::move(detail)});
  }
  void info(std::string id, std::string detail) {
    out_.push_back({std::move(id), Status::Info, std::move(detail)});
  }

 private:
  std::vector<CheckResult>& out_;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

// Mean and variance of absorption rounds from the fundamental matrix of the
// transient levels N..2.
std::pair<double, double> fundamental_matrix_moments(const chain::ClusterChain& c) {
  const auto n = static_cast<Eigen::Index>(c.transitions.size());
  if (n == 0) return {0.0, 0.0};
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    q(i, i) = c.transitions[static_cast<std::size_t>(i)].stay;
    if (i + 1 < n) q(i, i + 1) = c.transitions[static_cast<std::size_t>(i)].advance;
  }
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd fundamental = (identity - q).inverse();
  const Eigen::VectorXd t = fundamental * Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd var = (2.0 * fundamental - identity) * t - t.cwiseProduct(t);
  return {t(0), var(0)};
}

Rational enumerate_pair_acceptance(int n, int gap) {
  if (n < 2) return Rational(0);
  const int visible = n - gap;
  long long favourable = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && i < visible && j < visible && i > j) ++favourable;
    }
  }
  return Rational(favourable, static_cast<long long>(n) * (n - 1));
}

void chain_suite(const Options& opt, Recorder& rec) {
  {
    bool ok = chain::transition_fcn(1).stay == 1.0;
    for (int n = 2; n <= 64; ++n) {
      const double s = chain::transition_fcn(n).stay;
      ok = ok && s > 0.5 && s <= 1.0;
    }
    rec.check("chain.fcn_stay_range", ok, "1/2 < stay <= 1 for N <= 64, stay(1) = 1");
  }
  {
    // Only the M = N diagonal: with M held fixed, lower levels of an M = N
    // chain see a population larger than their cluster.
    double worst = 0.0;
    for (int n = 1; n <= 64; ++n) {
      worst = std::max(worst, std::abs(chain::transition_pcn(n, n).stay -
                                       chain::transition_fcn(n).stay));
    }
    rec.check("chain.pcn_equals_fcn_when_m_equals_n", worst <= 1e-15,
              "max |diff| = " + fmt(worst) + " for M = N <= 64");
  }
  {
    double worst = 0.0;
    for (int m = 2; m <= 64; ++m) {
      for (int n = 2; n <= m; ++n) {
        const double closed =
            chain::acceptance_prob_pcn_closed_form(m, n) + opt.closed_form_fault;
        worst = std::max(worst,
                         std::abs(chain::acceptance_prob_pcn_binomial_average(m, n) - closed));
      }
    }
    rec.check("chain.pcn_binomial_average_matches_closed_form", worst <= 1e-12,
              "max |diff| = " + fmt(worst) + " over 2 <= N <= M <= 64");
  }
  {
    double worst = 0.0;
    for (int m = 2; m <= 64; ++m) {
      for (int n = 2; n <= m; ++n) {
        const auto pmf = chain::visibility_gap_pmf(m, n);
        double avg = 0.0;
        for (int a = 0; a <= n; ++a) {
          avg += pmf[static_cast<std::size_t>(a)] * chain::acceptance_prob_pcn_fixed_a(n, a);
        }
        worst = std::max(worst, std::abs(avg - chain::acceptance_prob_pcn(m, n)));
      }
    }
    rec.check("chain.fixed_gap_average_matches_pcn", worst <= 1e-12,
              "max |diff| = " + fmt(worst));
  }
  {
    bool ok = true;
    for (int m = 1; m <= 64 && ok; ++m) {
      for (int n = 1; n <= m && ok; ++n) {
        const double s = chain::transition_pcn(m, n).stay;
        if (n < m && chain::transition_pcn(m, n + 1).stay > s + 1e-15) ok = false;
        if (m < 64 && chain::transition_pcn(m + 1, n).stay < s - 1e-15) ok = false;
      }
    }
    rec.check("chain.pcn_stay_monotone", ok,
              "nonincreasing in N, nondecreasing in M for M <= 64");
  }
  {
    double worst = 0.0;
    for (int n = 1; n <= 12; ++n) {
      std::vector<chain::VisibilityModel> models{chain::FullyCorrelated{}};
      for (int m = n; m <= 40; m += 3) models.push_back(chain::PartiallyCorrelated{m});
      for (const auto& model : models) {
        const auto c = chain::build_chain(model, n, 1.0);
        const auto stats = chain::absorption_stats(c);
        const auto [mean, var] = fundamental_matrix_moments(c);
        worst = std::max({worst, std::abs(stats.mean_rounds - mean) / std::max(1.0, mean),
                          std::abs(stats.var_rounds - var) / std::max(1.0, var)});
      }
    }
    rec.check("chain.absorption_matches_fundamental_matrix", worst <= 1e-9,
              "max relative diff = " + fmt(worst));
  }
  {
    double worst = 0.0;
    for (int n = 1; n <= 8; ++n) {
      const auto c = chain::build_chain(chain::FullyCorrelated{}, n, 1.0);
      for (int max_rounds : {0, 1, 5, 50, 400}) {
        const auto pmf = chain::absorption_pmf(c, max_rounds);
        double mass = pmf.tail;
        for (double p : pmf.pmf) mass += p;
        worst = std::max(worst, std::abs(mass - 1.0));
      }
    }
    rec.check("chain.absorption_pmf_mass", worst <= 1e-12, "max |mass - 1| = " + fmt(worst));
  }
  {
    bool ok = true;
    for (int n = 1; n <= 10; ++n) {
      for (int a = 0; a <= n; ++a) {
        const Rational exact = enumerate_pair_acceptance(n, a);
        ok = ok && chain::acceptance_prob_pcn_fixed_a(n, a) == boost::rational_cast<double>(exact);
      }
    }
    rec.check("chain.pair_enumeration_matches_fixed_gap", ok, "all N <= 10, a <= N");
  }
}

void rate_suite(const Options& opt, Recorder& rec) {
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> log_y(-1.0, 3.0);
  std::uniform_real_distribution<double> log_ratio(-2.0, 0.3);
  std::uniform_int_distribution<int> links(2, 64);

  std::vector<rate::RateParams> grid;
  while (grid.size() < 200) {
    rate::RateParams p;
    p.y = std::pow(10.0, log_y(rng));
    p.y_bar = p.y * std::pow(10.0, log_ratio(rng));
    p.total_links = links(rng);
    p.cost = rate::FixedCost{0.01};
    if (1.0 + p.total_links * p.y_bar - p.y > 0.0) grid.push_back(p);
  }

  {
    bool ok = true;
    for (auto p : grid) {
      const int n_max = rate::feasible_range(p);
      for (int n = 2; n <= n_max; ++n) {
        p.cost = rate::FixedCost{0.01};
        const double fixed_lo = *rate::rate_per_member(p, n);
        p.cost = rate::FixedCost{0.02};
        const double fixed_hi = *rate::rate_per_member(p, n);
        p.cost = rate::ProportionalCost{0.01};
        const double prop_lo = *rate::rate_per_member(p, n);
        p.cost = rate::ProportionalCost{0.02};
        const double prop_hi = *rate::rate_per_member(p, n);
        ok = ok && fixed_hi < fixed_lo && prop_hi < prop_lo;
      }
    }
    rec.check("rate.decreasing_in_cost", ok, "R_c and alpha, every feasible N >= 2");
  }
  {
    double worst = 0.0;
    for (auto p : grid) {
      const int n_max = rate::feasible_range(p);
      for (int n = 1; n <= n_max; ++n) {
        const double alpha = 0.01;
        const double d = 1.0 + (p.total_links - n + 1.0) * p.y_bar - n * p.y;
        const double full_rate = 0.5 * std::log2(1.0 + p.y / d);
        p.cost = rate::FixedCost{alpha * full_rate};
        const double fixed = *rate::rate_per_member(p, n);
        p.cost = rate::ProportionalCost{alpha};
        const double prop = *rate::rate_per_member(p, n);
        worst = std::max(worst, std::abs(fixed - prop));
      }
    }
    rec.check("rate.proportional_equals_equivalent_fixed", worst <= 1e-12,
              "max |diff| = " + fmt(worst));
  }
  {
    bool ok = true;
    for (auto p : grid) {
      const int n_max = rate::feasible_range(p);
      for (int n = 1; n <= n_max; ++n) {
        p.cost = rate::FixedCost{0.0};
        const double a = *rate::rate_per_member(p, n);
        p.cost = rate::ProportionalCost{0.0};
        const double b = *rate::rate_per_member(p, n);
        ok = ok && std::abs(a - b) <= 1e-14 * std::max(1.0, std::abs(a));
      }
    }
    rec.check("rate.zero_costs_identical", ok, "Fixed(0) and Proportional(0) rate curves");
  }
  {
    bool ok = true;
    for (auto p : grid) {
      const auto best = rate::optimal_cluster_size(p);
      const int n_max = rate::feasible_range(p);
      for (int n = 1; n <= n_max; ++n) {
        const double r = *rate::rate_per_member(p, n);
        if (r > best.rate || (r == best.rate && n < best.size)) ok = false;
      }
    }
    rec.check("rate.optimum_is_exhaustive_argmax", ok, "ties toward smaller N");
  }
  {
    int agree = 0;
    int total = 0;
    for (auto p : grid) {
      for (const rate::SignalingCost cost :
           {rate::SignalingCost{rate::FixedCost{0.01}},
            rate::SignalingCost{rate::ProportionalCost{0.01}}}) {
        p.cost = cost;
        const int n_max = rate::feasible_range(p);
        for (int n = 1; n <= n_max; ++n) {
          for (double frac : {0.25, 0.75}) {
            const double x = n + frac;
            const double h = 1e-4;
            if (x + h > n_max) continue;
            const auto rate_at = [&](double nn) {
              const double d = 1.0 + (p.total_links - nn + 1.0) * p.y_bar - nn * p.y;
              const double l = std::log2(1.0 + p.y / d);
              if (const auto* f = std::get_if<rate::FixedCost>(&p.cost)) {
                return l / (2.0 * nn) - (nn - 1.0) * f->rc;
              }
              const double a = std::get<rate::ProportionalCost>(p.cost).alpha;
              return (1.0 - a * nn * (nn - 1.0)) / (2.0 * nn) * l;
            };
            const double slope = (rate_at(x + h) - rate_at(x - h)) / (2.0 * h);
            const double residual = rate::stationarity_residual(p, x);
            if (std::abs(slope) < 1e-9) continue;
            ++total;
            if ((slope > 0.0) == (residual > 0.0)) ++agree;
          }
        }
      }
    }
    rec.check("rate.residual_sign_matches_finite_difference", agree == total,
              std::to_string(agree) + "/" + std::to_string(total) + " grid points agree");
  }
  {
    int roots = 0;
    int within = 0;
    for (auto p : grid) {
      const auto root = rate::bracket_stationary_point(p);
      if (!root) continue;
      ++roots;
      if (std::abs(std::lround(*root) - rate::optimal_cluster_size(p).size) <= 1) ++within;
    }
    rec.info("rate.stationary_root_near_argmax",
             std::to_string(within) + "/" + std::to_string(roots) +
                 " bracketed roots round to within 1 of the argmax (soft check)");
  }
  {
    // Vanishing cost, head SNR equal to the mean interferer SNR: the optimum
    // should not shrink as the SNR grows.
    int first = 0;
    int last = 0;
    for (double snr_db = -10.0; snr_db <= 40.0; snr_db += 5.0) {
      rate::RateParams p;
      p.y = p.y_bar = std::pow(10.0, snr_db / 10.0);
      p.total_links = 10;
      p.cost = rate::ProportionalCost{0.0};
      const int n = rate::optimal_cluster_size(p).size;
      if (snr_db == -10.0) first = n;
      last = n;
    }
    rec.info("rate.cluster_size_trend",
             "N* at -10 dB = " + std::to_string(first) + ", at 40 dB = " + std::to_string(last));
  }
}

netsim::Network random_gain_network(std::mt19937_64& rng, std::size_t m) {
  std::uniform_real_distribution<double> g(0.01, 2.0);
  std::vector<double> gains(m * m);
  for (auto& v : gains) v = g(rng);
  std::vector<double> powers(m);
  for (auto& v : powers) v = g(rng);
  return netsim::Network::from_gains(std::move(gains), std::move(powers), 0.1);
}

void netsim_suite(const Options& opt, Recorder& rec) {
  std::mt19937_64 rng(opt.seed + 1);
  {
    bool ok = true;
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t m = 2 + trial % 6;
      const auto net = random_gain_network(rng, m);
      for (netsim::LinkId r = 0; r < m; ++r) {
        for (netsim::LinkId i = 0; i < m; ++i) {
          if (i == r) continue;
          std::vector<double> gains(m * m);
          std::vector<double> powers(m);
          for (netsim::LinkId a = 0; a < m; ++a) {
            powers[a] = net.power(a);
            for (netsim::LinkId b = 0; b < m; ++b) gains[a * m + b] = net.gain(a, b);
          }
          powers[i] *= 1.5;
          const auto louder = netsim::Network::from_gains(gains, powers, net.noise());
          ok = ok && netsim::sinr_all_active(louder, r) < netsim::sinr_all_active(net, r);
        }
      }
    }
    rec.check("netsim.sinr_decreases_with_interferer_power", ok, "200 random networks");
  }
  {
    bool ok = true;
    for (int trial = 0; trial < 100; ++trial) {
      const auto net = random_gain_network(rng, 2 + trial % 5);
      for (netsim::LinkId r = 0; r < net.size(); ++r) {
        const std::vector<netsim::LinkId> self{r};
        ok = ok && netsim::coalition_rate(net, r, self, 0.0) ==
                       netsim::rate_spread(netsim::sinr_all_active(net, r));
      }
    }
    rec.check("netsim.singleton_coalition_equals_spread", ok, "exact equality");
  }
  {
    bool ok = true;
    for (int trial = 0; trial < 100; ++trial) {
      const auto net = random_gain_network(rng, 6);
      std::vector<netsim::LinkId> coalition{0};
      double prev_sinr = netsim::sinr_all_active(net, 0);
      for (netsim::LinkId next = 1; next < net.size(); ++next) {
        coalition.push_back(next);
        std::vector<netsim::LinkId> outside;
        for (netsim::LinkId j = next + 1; j < net.size(); ++j) outside.push_back(j);
        const double s = netsim::sinr(net, 0, outside);
        const double prelog_prev = 1.0 / (2.0 * (coalition.size() - 1));
        const double prelog = 1.0 / (2.0 * coalition.size());
        ok = ok && s >= prev_sinr && prelog < prelog_prev;
        prev_sinr = s;
      }
    }
    rec.check("netsim.enlarging_coalition_tradeoff", ok,
              "SINR never decreases, prelog strictly decreases");
  }
  {
    bool ok = true;
    for (int trial = 0; trial < 100; ++trial) {
      const auto net = random_gain_network(rng, 7);
      std::vector<netsim::LinkId> cluster{0, 1, 2, 3, 4, 5, 6};
      const auto reference = netsim::interference_list(net, 3, cluster);
      std::shuffle(cluster.begin(), cluster.end(), rng);
      const auto shuffled = netsim::interference_list(net, 3, cluster);
      std::vector<netsim::LinkId> ids;
      for (const auto& e : reference.entries) ids.push_back(e.link);
      std::sort(ids.begin(), ids.end());
      ok = ok && reference == shuffled &&
           std::is_sorted(reference.entries.begin(), reference.entries.end(),
                          [](const auto& a, const auto& b) { return a.level < b.level; }) &&
           ids == std::vector<netsim::LinkId>{0, 1, 2, 3, 4, 5, 6};
    }
    rec.check("netsim.interference_list_sorted_permutation", ok,
              "sorted, permutation, order independent");
  }
  {
    netsim::PlacementConfig placement;
    placement.seed = opt.seed;
    const auto a = netsim::generate_network(25, placement);
    const auto b = netsim::generate_network(25, placement);
    rec.check("netsim.generation_reproducible", a == b, "M = 25, same seed");
  }
}

void cfp_suite(const Options& opt, Recorder& rec) {
  {
    // Random step/arrival/departure sequences.
    std::mt19937_64 rng(opt.seed + 2);
    netsim::PlacementConfig placement;
    placement.seed = opt.seed;
    auto net = std::make_shared<const netsim::Network>(netsim::generate_network(12, placement));
    bool partition_ok = true;
    bool level_ok = true;
    std::string first_violation;
    for (int seq = 0; seq < 1000; ++seq) {
      cfp::Model model = cfp::AbstractModel{chain::PartiallyCorrelated{12}};
      if (seq % 2 == 1) model = cfp::GeometricModel{net, 0.0};
      auto state = cfp::CfpState::init(model, 6, {}, cfp::CoalitionRepresentation::SumLevel,
                                       rng());
      for (int op = 0; op < 30; ++op) {
        const int before = state.level();
        const auto choice = rng() % 3;
        if (choice == 0 && !state.absorbed()) state.step();
        else if (choice == 1 && (seq % 2 == 0 || !state.standby_pool().empty())) state.apply_arrival();
        else if (choice == 2 && state.level() >= 2) state.apply_departure();
        if (std::abs(state.level() - before) > 1) level_ok = false;
        if (auto v = state.find_invariant_violation()) {
          if (partition_ok) first_violation = *v;
          partition_ok = false;
        }
      }
    }
    rec.check("cfp.partition_invariant", partition_ok,
              partition_ok ? "1000 random sequences" : first_violation);
    rec.check("cfp.level_changes_by_at_most_one", level_ok, "1000 random sequences");
  }
  {
    cfp::MonteCarloConfig mc;
    mc.model = cfp::AbstractModel{chain::FullyCorrelated{}};
    mc.cluster_size = 5;
    mc.runs = opt.runs;
    mc.seed = opt.seed;
    const auto stats = cfp::monte_carlo(mc);
    double worst_z = 0.0;
    for (const auto& [level, counts] : stats.transitions) {
      const double q = chain::transition_fcn(level).advance;
      const double se = std::sqrt(q * (1.0 - q) / static_cast<double>(counts.visits()));
      worst_z = std::max(worst_z, std::abs(counts.advance_frequency() - q) / se);
    }
    const double model_mean =
        chain::absorption_stats(chain::build_chain(chain::FullyCorrelated{}, 5, 1.0)).mean_rounds;
    const double z_mean = std::abs(stats.mean_rounds - model_mean) / stats.se_mean;
    rec.check("cfp.fcn_advance_frequencies", worst_z < 3.0,
              "max |z| = " + fmt(worst_z) + " over levels 5..2");
    rec.check("cfp.fcn_mean_rounds", z_mean < 3.0,
              "mean " + fmt(stats.mean_rounds) + " vs " + fmt(model_mean) + ", |z| = " + fmt(z_mean));
  }
  {
    // Fresh level-N clusters: acceptance when the initiator's own signal is
    // the weakest on its list.
    const int m = 10;
    const int n = 3;
    std::uint64_t proposals = 0;
    std::uint64_t accepted = 0;
    for (std::uint64_t i = 0; i < opt.runs * 10; ++i) {
      auto state = cfp::CfpState::init(cfp::AbstractModel{chain::PartiallyCorrelated{m}}, n,
                                       {}, cfp::CoalitionRepresentation::HeadLevel,
                                       cfp::derive_seed(opt.seed + 3, i));
      const auto event = state.step();
      if (event.own_depth != 0) continue;
      ++proposals;
      if (event.kind == cfp::EventKind::Merged) ++accepted;
    }
    const double p = chain::acceptance_prob_pcn(m, n);
    const double freq = static_cast<double>(accepted) / static_cast<double>(proposals);
    const double z = (freq - p) / std::sqrt(p * (1.0 - p) / static_cast<double>(proposals));
    rec.check("cfp.pcn_fresh_acceptance", std::abs(z) < 3.0,
              "freq " + fmt(freq) + " vs " + fmt(p) + ", |z| = " + fmt(std::abs(z)));
  }
  {
    netsim::PlacementConfig placement;
    bool ok = true;
    int merges = 0;
    for (int trial = 0; trial < 200; ++trial) {
      placement.seed = cfp::derive_seed(opt.seed + 4, static_cast<std::uint64_t>(trial));
      placement.width = placement.height = 30.0;
      auto net = std::make_shared<const netsim::Network>(netsim::generate_network(8, placement));
      auto state = cfp::CfpState::init(cfp::GeometricModel{net, 0.0}, 8,
                                       {cfp::RandomTarget{}, cfp::Experiential{}},
                                       cfp::CoalitionRepresentation::HeadLevel,
                                       placement.seed);
      for (int round = 0; round < 50 && !state.absorbed(); ++round) {
        const auto event = state.step();
        if (event.kind != cfp::EventKind::Merged) continue;
        ++merges;
        const auto& members = state.members_of(event.initiator);
        std::vector<std::uint8_t> mask(net->size(), 1);
        ok = ok && netsim::coalition_benefit_check(*net, members, 0.0, mask);
      }
    }
    rec.check("cfp.experiential_merges_benefit", ok,
              std::to_string(merges) + " merges checked");
  }
  {
    cfp::MonteCarloConfig mc;
    mc.model = cfp::AbstractModel{chain::PartiallyCorrelated{10}};
    mc.cluster_size = 4;
    mc.runs = 500;
    mc.seed = opt.seed;
    mc.threads = 1;
    const auto serial = cfp::monte_carlo(mc);
    mc.threads = 4;
    const auto parallel = cfp::monte_carlo(mc);
    rec.check("cfp.reproducible_across_threads",
              serial.samples == parallel.samples && serial.mean_rounds == parallel.mean_rounds,
              "500 runs, 1 vs 4 threads");
  }
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"chain", "rate", "netsim", "cfp"};
  return names;
}

std::vector<CheckResult> run_checks(const Options& options) {
  std::vector<std::string> selected = options.suites.empty() ? suite_names() : options.suites;
  for (const auto& s : selected) {
    if (std::find(suite_names().begin(), suite_names().end(), s) == suite_names().end()) {
      throw ConfigError("unknown suite '" + s + "' (expected chain, rate, netsim or cfp)");
    }
  }
  std::vector<CheckResult> results;
  Recorder rec(results);
  for (const auto& s : suite_names()) {
    if (std::find(selected.begin(), selected.end(), s) == selected.end()) continue;
    if (s == "chain") chain_suite(options, rec);
    if (s == "rate") rate_suite(options, rec);
    if (s == "netsim") netsim_suite(options, rec);
    if (s == "cfp") cfp_suite(options, rec);
  }
  return results;
}

std::string to_string(Status status) {
  switch (status) {
    case Status::Pass: return "PASS";
    case Status::Fail: return "FAIL";
    case Status::Info: return "INFO";
  }
  return "?";
}

}  // namespace coalition::validation
