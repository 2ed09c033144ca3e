#pragma once

#include <optional>
#include <variant>

#include "coalition/errors.hpp"

/// Throughput of a coalition cluster head as a function of the cluster size,
/// and the cluster-size optimizer built on it.
namespace coalition::rate {

/// Constant per-peer signaling rate R_c (bits/channel use).
struct FixedCost {
  double rc = 0.0;
};

/// Signaling rate proportional to the achievable data rate, R_c = alpha * R.
struct ProportionalCost {
  double alpha = 0.0;
};

using SignalingCost = std::variant<FixedCost, ProportionalCost>;

struct RateParams {
  double y = 1.0;      ///< linear SNR of the coalition head
  double y_bar = 1.0;  ///< mean linear SNR of the interferers
  int total_links = 1;
  SignalingCost cost = FixedCost{};

  /// Throws DomainError on nonpositive SNRs, M < 1 or negative cost.
  void validate() const;
};

struct ClusterOptimum {
  int size = 1;
  double rate = 0.0;
};

/// Estimated interference from links outside the cluster in SNR units:
/// (M - N + 1) * y_bar - N * y. May be <= 0.
double estimated_external_interference(const RateParams& params, int cluster_size);

/// Rate per coalition member, or nullopt when 1 + estimated interference
/// is not positive.
std::optional<double> rate_per_member(const RateParams& params, int cluster_size);

/// Largest N <= M whose interference estimate keeps the denominator positive.
/// Throws InfeasibleNetwork when even N = 1 fails.
int feasible_range(const RateParams& params);

/// Integer argmax over the feasible sizes. Ties go to the smaller N.
ClusterOptimum optimal_cluster_size(const RateParams& params);

/// Stationarity condition of the continuous relaxation, written as
/// right-hand side minus left-hand side of the first-order condition so that
/// the residual has the sign of d(rate)/dN. Throws DomainError when either
/// denominator D(N) or D(N) + y is not positive.
double stationarity_residual(const RateParams& params, double cluster_size);

/// Scans N = 1, 2, ... over the feasible sizes for the first sign change of
/// the residual and bisects it to 1e-6. nullopt when the residual keeps one
/// sign.
std::optional<double> bracket_stationary_point(const RateParams& params);

}  // namespace coalition::rate
