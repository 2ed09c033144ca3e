// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance 3 6        run the listed criteria only
//
// Exit status is nonzero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "coalition/cfp_engine.hpp"
#include "coalition/chain_model.hpp"
#include "coalition/errors.hpp"
#include "coalition/netsim.hpp"
#include "coalition/rate_model.hpp"

using namespace coalition;
using netsim::LinkId;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  double time_limit_s;
  std::function<Outcome()> body;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

// ------------------------------------------------------------------ 1

Outcome closed_form_identities() {
  double worst = 0.0;
  for (int m = 2; m <= 64; ++m) {
    for (int n = 2; n <= m; ++n) {
      worst = std::max(worst, std::abs(chain::acceptance_prob_pcn_binomial_average(m, n) -
                                       chain::acceptance_prob_pcn_closed_form(m, n)));
    }
  }
  bool fcn_ok = true;
  for (int n = 2; n <= 64; ++n) fcn_ok = fcn_ok && chain::acceptance_prob_fcn(n) == 0.5;
  return {worst <= 1e-12 && fcn_ok, "max |average - closed form| = " + fmt(worst) +
                                        " (tol 1e-12); fcn acceptance = 0.5 for 2..64: " +
                                        (fcn_ok ? "yes" : "no")};
}

// ------------------------------------------------------------------ 2

Outcome enumeration_oracle() {
  int mismatches = 0;
  int cases = 0;
  for (int n = 1; n <= 10; ++n) {
    for (int a = 0; a <= n; ++a) {
      ++cases;
      const auto exact = oracle::enumerate_fixed_gap(n, a);
      // The nearest double to the exact rational (one correctly rounded
      // division of small integers).
      const double rounded = static_cast<double>(exact.numerator()) /
                             static_cast<double>(exact.denominator());
      if (chain::acceptance_prob_pcn_fixed_a(n, a) != rounded) ++mismatches;
    }
  }
  return {mismatches == 0, std::to_string(cases) + " (N, a) cases, " +
                               std::to_string(mismatches) +
                               " differ from the correctly rounded rational"};
}

// ------------------------------------------------------------------ 3

Outcome transition_values() {
  bool range_ok = chain::transition_fcn(1).stay == 1.0;
  for (int n = 2; n <= 64; ++n) {
    const double s = chain::transition_fcn(n).stay;
    range_ok = range_ok && s > 0.5 && s <= 1.0;
  }
  const bool spot_ok = std::abs(chain::transition_fcn(2).stay - 0.75) <= 1e-12 &&
                       std::abs(chain::transition_fcn(10).stay - 0.55) <= 1e-12;

  int mismatched = 0;
  int pairs = 0;
  double worst = 0.0;
  for (int n = 1; n <= 32; ++n) {
    for (int m = 1; m <= n; ++m) {
      ++pairs;
      const double diff =
          std::abs(chain::transition_pcn(n, m).stay - chain::transition_fcn(m).stay);
      worst = std::max(worst, diff);
      if (diff > 1e-12) ++mismatched;
    }
  }
  return {range_ok && spot_ok && mismatched == 0,
          std::string("fcn range ") + (range_ok ? "ok" : "violated") + ", spot values " +
              (spot_ok ? "ok" : "wrong") + "; pcn(M = N, m) vs fcn(m): " +
              std::to_string(mismatched) + "/" + std::to_string(pairs) +
              " pairs differ (max " + fmt(worst) + ", tol 1e-12)"};
}

// ------------------------------------------------------------------ 4

Outcome bounds_containment() {
  int violations = 0;
  int cases = 0;
  std::string first;
  bool equality_at_two = true;
  for (int m = 2; m <= 64; ++m) {
    for (int n = 2; n <= m; ++n) {
      ++cases;
      const double stay = chain::transition_pcn(m, n).stay;
      const auto b = chain::pcn_stay_bounds(m, n);
      if (stay < b.lower - 1e-12 || stay > b.upper + 1e-12) {
        if (violations == 0) {
          first = " (first: M = " + std::to_string(m) + ", N = " + std::to_string(n) +
                  ", stay " + fmt(stay) + " not in [" + fmt(b.lower) + ", " + fmt(b.upper) +
                  "])";
        }
        ++violations;
      }
      if (n == 2 && std::abs(stay - b.lower) > 1e-12) equality_at_two = false;
    }
  }
  return {violations == 0 && equality_at_two,
          std::to_string(violations) + "/" + std::to_string(cases) + " outside the bounds" +
              first + "; equality at N = 2: " + (equality_at_two ? "yes" : "no")};
}

// ------------------------------------------------------------------ 5

Outcome absorption_statistics() {
  double worst = 0.0;
  int chains = 0;
  for (int n = 1; n <= 12; ++n) {
    for (int m = n; m <= 40; ++m) {
      for (int kind = 0; kind < 2; ++kind) {
        if (kind == 0 && m != n) continue;  // fcn chains do not depend on M
        const chain::VisibilityModel model =
            kind == 0 ? chain::VisibilityModel{chain::FullyCorrelated{}}
                      : chain::VisibilityModel{chain::PartiallyCorrelated{m}};
        std::vector<double> advance;
        for (int level = n; level >= 2; --level) {
          advance.push_back(kind == 0 ? oracle::fcn_advance(level)
                                      : oracle::pcn_advance(m, level));
        }
        const auto expected = oracle::fundamental_matrix(advance);
        const auto got = chain::absorption_stats(chain::build_chain(model, n, 1.0));
        const auto rel = [](double a, double b) {
          return std::abs(a - b) / std::max(1.0, std::abs(b));
        };
        worst = std::max({worst, rel(got.mean_rounds, expected.mean_rounds),
                          rel(got.var_rounds, expected.var_rounds)});
        ++chains;
      }
    }
  }
  const double fcn5 =
      chain::absorption_stats(chain::build_chain(chain::FullyCorrelated{}, 5, 1.0)).mean_time;
  const bool spot = std::abs(fcn5 - 12.1667) <= 1e-4;
  return {worst <= 1e-9 && spot, std::to_string(chains) +
                                     " chains, max relative diff vs fundamental matrix " +
                                     fmt(worst) + " (tol 1e-9); FCN N = 5 mean " + fmt(fcn5)};
}

// ------------------------------------------------------------------ 6

Outcome monte_carlo_vs_closed_form() {
  cfp::MonteCarloConfig fcn;
  fcn.model = cfp::AbstractModel{chain::FullyCorrelated{}};
  fcn.cluster_size = 5;
  fcn.runs = 20000;
  fcn.seed = 20240601;
  const auto a = cfp::monte_carlo(fcn);
  const double fcn_mean = oracle::fundamental_matrix({oracle::fcn_advance(5), oracle::fcn_advance(4),
                                                      oracle::fcn_advance(3), oracle::fcn_advance(2)})
                              .mean_rounds;
  const double z_mean = (a.mean_rounds - fcn_mean) / a.se_mean;
  double worst_level = 0.0;
  bool levels_ok = a.transitions.size() == 4;
  for (const auto& [level, counts] : a.transitions) {
    const double z =
        (counts.advance_frequency() - oracle::fcn_advance(level)) / counts.standard_error();
    worst_level = std::max(worst_level, std::abs(z));
    levels_ok = levels_ok && std::abs(z) < 3.0;
  }

  cfp::MonteCarloConfig pcn = fcn;
  pcn.model = cfp::AbstractModel{chain::PartiallyCorrelated{10}};
  pcn.cluster_size = 3;
  const auto b = cfp::monte_carlo(pcn);
  const double pcn_mean =
      oracle::fundamental_matrix({oracle::pcn_advance(10, 3), oracle::pcn_advance(10, 2)})
          .mean_rounds;
  const double z_pcn = (b.mean_rounds - pcn_mean) / b.se_mean;

  const bool pass = a.timeouts == 0 && b.timeouts == 0 && std::abs(z_mean) < 3.0 && levels_ok &&
                    std::abs(z_pcn) < 3.0;
  return {pass, "FCN N=5 mean " + fmt(a.mean_rounds) + " vs " + fmt(fcn_mean) + " (z " +
                    fmt(z_mean) + "), max per-level |z| " + fmt(worst_level) +
                    "; PCN M=10 N=3 mean " + fmt(b.mean_rounds) + " vs " + fmt(pcn_mean) +
                    " (z " + fmt(z_pcn) + ")"};
}

// ------------------------------------------------------------------ 7

Outcome optimizer_spot_values() {
  const auto a = rate::optimal_cluster_size({10.0, 1.0, 25, rate::FixedCost{0.01}});
  const auto b = rate::optimal_cluster_size({1.0, 1.0, 10, rate::FixedCost{0.0}});
  const auto ra = oracle::brute_force_optimum(10.0, 1.0, 25, oracle::Cost::Fixed, 0.01);
  const auto rb = oracle::brute_force_optimum(1.0, 1.0, 10, oracle::Cost::Fixed, 0.0);
  const bool pass = a.size == 2 && std::abs(a.rate - 0.38624) <= 1e-4 && b.size == 1 &&
                    std::abs(b.rate - 0.06875) <= 1e-4 && a.size == ra.size && b.size == rb.size;
  return {pass, "(y=10, y_bar=1, M=25, R_c=0.01) -> N* " + std::to_string(a.size) + ", rate " +
                    fmt(a.rate) + "; (y=y_bar=1, M=10, R_c=0) -> N* " + std::to_string(b.size) +
                    ", rate " + fmt(b.rate)};
}

// ------------------------------------------------------------------ 8

Outcome sweep_trends() {
  // SNR sweep with the interferer SNR tied to the head SNR (y_bar = y).
  bool gain_ok = true;
  bool trend_ok = true;
  std::string trends;
  for (int m : {10, 25}) {
    for (int mode = 0; mode < 2; ++mode) {
      const rate::SignalingCost cost = mode == 0 ? rate::SignalingCost{rate::FixedCost{0.01}}
                                                 : rate::SignalingCost{rate::ProportionalCost{0.01}};
      int bottom = 0;
      int top = 0;
      for (double db = -10.0; db <= 40.0 + 1e-9; db += 2.0) {
        const double y = std::pow(10.0, db / 10.0);
        const rate::RateParams p{y, y, m, cost};
        const auto best = rate::optimal_cluster_size(p);
        const double single = *rate::rate_per_member(p, 1);
        gain_ok = gain_ok && best.rate >= single;
        if (bottom == 0) bottom = best.size;
        top = best.size;
      }
      trend_ok = trend_ok && top >= bottom;
      trends += " M=" + std::to_string(m) + (mode == 0 ? " fixed " : " prop ") +
                std::to_string(bottom) + "->" + std::to_string(top) + ";";
    }
  }
  // Cheap signaling at high SNR, M = 10.
  bool half_ok = true;
  std::string half;
  for (int mode = 0; mode < 2; ++mode) {
    const rate::SignalingCost cost = mode == 0 ? rate::SignalingCost{rate::FixedCost{1e-4}}
                                               : rate::SignalingCost{rate::ProportionalCost{1e-4}};
    const double y = 1000.0;
    const auto best = rate::optimal_cluster_size({y, y, 10, cost});
    half_ok = half_ok && best.size >= 10 / 2 - 2;
    half += std::string(mode == 0 ? " fixed " : " prop ") + std::to_string(best.size);
  }
  return {gain_ok && trend_ok && half_ok,
          std::string("rate_opt >= rate_singleton: ") + (gain_ok ? "yes" : "no") +
              "; N* bottom->top:" + trends + " N* at 30 dB, cost 1e-4, M=10:" + half +
              " (need >= 3)"};
}

// ------------------------------------------------------------------ 9

Outcome stationarity_cross_check() {
  std::mt19937_64 rng(909);
  std::uniform_real_distribution<double> snr_db(-10.0, 40.0);
  std::uniform_real_distribution<double> ratio_db(-10.0, 0.0);
  std::uniform_int_distribution<int> links(2, 64);
  std::uniform_real_distribution<double> cost(1e-4, 0.05);
  int with_root = 0;
  int near = 0;
  std::string first_miss;
  for (int k = 0; k < 100; ++k) {
    const double y = std::pow(10.0, snr_db(rng) / 10.0);
    const double y_bar = y * std::pow(10.0, ratio_db(rng) / 10.0);
    const int m = links(rng);
    const double c = cost(rng);
    const rate::RateParams p{y, y_bar, m,
                             k % 2 == 0 ? rate::SignalingCost{rate::FixedCost{c}}
                                        : rate::SignalingCost{rate::ProportionalCost{c}}};
    std::optional<double> root;
    try {
      root = rate::bracket_stationary_point(p);
    } catch (const InfeasibleNetwork&) {
      continue;
    }
    if (!root) continue;
    ++with_root;
    const int best = rate::optimal_cluster_size(p).size;
    if (std::abs(std::lround(*root) - best) <= 1) {
      ++near;
    } else if (first_miss.empty()) {
      first_miss = " (first miss: root " + fmt(*root) + ", argmax " + std::to_string(best) + ")";
    }
  }
  return {near == with_root, std::to_string(near) + "/" + std::to_string(with_root) +
                                 " bracketed roots within 1 of the argmax over 100 points" +
                                 first_miss};
}

// ----------------------------------------------------------------- 10

Outcome protocol_invariants() {
  std::mt19937_64 rng(1010);
  std::uniform_int_distribution<int> action(0, 3);
  int sequences = 0;
  int broken_partition = 0;
  int broken_level = 0;
  int h_merges = 0;
  int h_violations = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::uint64_t seed = cfp::derive_seed(1010, static_cast<std::uint64_t>(trial));
    const int kind = trial % 4;
    cfp::Model model = cfp::AbstractModel{chain::FullyCorrelated{}};
    int n = 6;
    cfp::Rules rules;
    auto repr = cfp::CoalitionRepresentation::HeadLevel;
    if (kind == 1) {
      model = cfp::AbstractModel{chain::PartiallyCorrelated{12}};
      rules = {cfp::WithinDelta{1}, cfp::MaxInterferer{}};
    } else if (kind >= 2) {
      netsim::PlacementConfig placement;
      placement.width = placement.height = 25.0;
      placement.seed = seed;
      model = cfp::GeometricModel{
          std::make_shared<const netsim::Network>(netsim::generate_network(12, placement)), 0.01};
      rules = kind == 2 ? cfp::Rules{cfp::RandomTarget{}, cfp::Experiential{}}
                        : cfp::Rules{cfp::MaxInterferer{}, cfp::WithinDelta{2}};
      repr = kind == 2 ? cfp::CoalitionRepresentation::HeadLevel
                       : cfp::CoalitionRepresentation::SumLevel;
    }
    auto state = cfp::CfpState::init(model, n, rules, repr, seed);
    const auto* geo = std::get_if<cfp::GeometricModel>(&state.model());
    for (int op = 0; op < 40; ++op) {
      const int before = state.level();
      const int a = action(rng);
      if (a <= 1 && !state.absorbed()) {
        const auto e = state.step();
        if (e.kind == cfp::EventKind::Merged && geo &&
            std::holds_alternative<cfp::Experiential>(rules.acceptor)) {
          ++h_merges;
          std::vector<std::uint8_t> active(geo->network->size());
          for (LinkId l = 0; l < active.size(); ++l) active[l] = state.is_active(l) ? 1 : 0;
          if (!netsim::coalition_benefit_check(*geo->network, state.members_of(e.initiator),
                                               geo->signaling_rate, active)) {
            ++h_violations;
          }
        }
      } else if (a == 2 && (!geo || !state.standby_pool().empty())) {
        state.apply_arrival();
      } else if (a == 3 && state.level() >= 2) {
        state.apply_departure();
      }
      if (std::abs(state.level() - before) > 1) ++broken_level;
      if (state.find_invariant_violation()) ++broken_partition;
    }
    ++sequences;
  }
  const bool pass = broken_partition == 0 && broken_level == 0 && h_violations == 0 && h_merges > 0;
  return {pass, std::to_string(sequences) + " sequences: " + std::to_string(broken_partition) +
                    " partition violations, " + std::to_string(broken_level) +
                    " level jumps > 1; rule-h merges " + std::to_string(h_merges) + ", " +
                    std::to_string(h_violations) + " without benefit"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, 1.0, closed_form_identities},   {2, 1.0, enumeration_oracle},
      {3, 1.0, transition_values},        {4, 1.0, bounds_containment},
      {5, 1.0, absorption_statistics},    {6, 30.0, monte_carlo_vs_closed_form},
      {7, 1.0, optimizer_spot_values},    {8, 30.0, sweep_trends},
      {9, 5.0, stationarity_cross_check}, {10, 30.0, protocol_invariants},
  };

  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    try {
      selected.push_back(std::stoi(argv[i]));
    } catch (const std::exception&) {
      std::cerr << "usage: acceptance [criterion ...]\n";
      return 2;
    }
  }

  int failed = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) {
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.body();
    } catch (const std::exception& e) {
      outcome = {false, std::string("threw: ") + e.what()};
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = elapsed < c.time_limit_s;
    const bool pass = outcome.pass && in_time;
    if (!pass) ++failed;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << outcome.detail
              << " [" << fmt(elapsed) << " s, limit " << fmt(c.time_limit_s) << " s"
              << (in_time ? "" : ", too slow") << "]\n";
  }
  return failed == 0 ? 0 : 1;
}
