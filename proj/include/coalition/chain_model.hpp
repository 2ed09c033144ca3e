#pragma once

#include <variant>
#include <vector>

#include "coalition/errors.hpp"

/// Closed-form model of distributed coalition formation as an absorbing
/// death chain over negotiation levels G(N) -> G(N-1) -> ... -> G(1).
///
/// Level m counts the current negotiators (singletons or coalition heads).
/// Each negotiation round either leaves the level unchanged (stay) or merges
/// two negotiators (advance). Level 1 is the absorbing grand coalition.
///
/// All functions are pure and safe to call concurrently.
namespace coalition::chain {

/// Every receiver observes every other transmitter of the cluster.
struct FullyCorrelated {};

/// A transmitter is unobserved by a binomially distributed number of the
/// cluster receivers; `total_links` is the network size M the cluster is
/// drawn from.
struct PartiallyCorrelated {
  int total_links = 0;
};

using VisibilityModel = std::variant<FullyCorrelated, PartiallyCorrelated>;

struct LevelTransition {
  int level = 1;
  double stay = 1.0;
  double advance = 0.0;
};

struct ClusterChain {
  /// Levels N, N-1, ..., 2 in that order; empty for an N = 1 chain.
  std::vector<LevelTransition> transitions;
  double round_duration = 1.0;

  int top_level() const {
    return transitions.empty() ? 1 : transitions.front().level;
  }
};

struct AbsorptionStats {
  double mean_rounds = 0.0;
  double var_rounds = 0.0;
  double mean_time = 0.0;
  double var_time = 0.0;
};

/// Distribution of the number of rounds until the grand coalition forms.
/// `pmf[r]` is the probability of absorbing after exactly r rounds, for
/// r = 0..max_rounds. `tail` is the mass still transient after max_rounds.
struct AbsorptionPmf {
  std::vector<double> pmf;
  double tail = 0.0;
};

struct StayBounds {
  double lower = 0.0;
  double upper = 1.0;
};

/// Spatial correlation rho = 1 - a/N.
double correlation(int gap, int cluster_size);

/// Binomial law of the visibility gap a over {0..N} with p = 1 - N/M.
std::vector<double> visibility_gap_pmf(int total_links, int cluster_size);

double acceptance_prob_fcn(int cluster_size);

/// Acceptance probability with exactly `gap` unobservable interferers.
double acceptance_prob_pcn_fixed_a(int cluster_size, int gap);

/// The fixed-gap acceptance probability averaged over the binomial gap law,
/// summed term by term.
double acceptance_prob_pcn_binomial_average(int total_links, int cluster_size);

/// (1/2)(N/M)^2 for N >= 2, 0 for N = 1.
double acceptance_prob_pcn_closed_form(int total_links, int cluster_size);

/// Evaluates both the binomial average and the closed form, checks that they
/// agree to 1e-12 and returns the closed form. A disagreement throws
/// std::logic_error.
double acceptance_prob_pcn(int total_links, int cluster_size);

LevelTransition transition_fcn(int level);
LevelTransition transition_pcn(int total_links, int level);
LevelTransition transition(const VisibilityModel& model, int level);

/// Analytic bracket of the partially correlated stay probability, ordered so
/// that lower <= upper. Requires 2 <= N <= M.
StayBounds pcn_stay_bounds(int total_links, int cluster_size);

/// Chain for a cluster of N negotiators. In the partially correlated model M
/// is held fixed at every level.
ClusterChain build_chain(const VisibilityModel& model, int cluster_size,
                         double round_duration);

/// Mean and variance of the absorption time as a sum of independent
/// geometric sojourns, one per level. Throws NonAbsorbingChain when a level
/// has zero advance probability.
AbsorptionStats absorption_stats(const ClusterChain& chain);

/// Absorption-round distribution by propagating the level occupancy one round
/// at a time. `max_rounds` = 0 yields a single zero entry and the full mass in
/// `tail` unless the chain starts absorbed.
AbsorptionPmf absorption_pmf(const ClusterChain& chain, int max_rounds);

}  // namespace coalition::chain
