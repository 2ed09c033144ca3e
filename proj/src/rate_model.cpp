#include "coalition/rate_model.hpp"

#include <cmath>
#include <string>
#include <type_traits>

namespace coalition::rate {

namespace {

constexpr double kBisectionTolerance = 1e-6;

void require_size(const RateParams& params, double cluster_size) {
  if (!(cluster_size >= 1.0) || cluster_size > params.total_links) {
    throw DomainError("cluster size " + std::to_string(cluster_size) +
                      " outside [1, " + std::to_string(params.total_links) + "]");
  }
}

// 1 + (M - N + 1) y_bar - N y, continuous in N.
double denominator(const RateParams& p, double n) {
  return 1.0 + (p.total_links - n + 1.0) * p.y_bar - n * p.y;
}

}  // namespace

void RateParams::validate() const {
  if (!(y > 0.0) || !(y_bar > 0.0)) {
    throw DomainError("SNRs y and y_bar must be positive");
  }
  if (total_links < 1) {
    throw DomainError("network size M must be >= 1");
  }
  const bool negative_cost = std::visit(
      [](const auto& c) {
        if constexpr (std::is_same_v<std::decay_t<decltype(c)>, FixedCost>) {
          return !(c.rc >= 0.0);
        } else {
          return !(c.alpha >= 0.0);
        }
      },
      cost);
  if (negative_cost) {
    throw DomainError("signaling cost must be >= 0");
  }
}

double estimated_external_interference(const RateParams& params, int cluster_size) {
  params.validate();
  require_size(params, cluster_size);
  return denominator(params, cluster_size) - 1.0;
}

std::optional<double> rate_per_member(const RateParams& params, int cluster_size) {
  params.validate();
  require_size(params, cluster_size);
  const double d = denominator(params, cluster_size);
  if (!(d > 0.0)) return std::nullopt;

  const double n = cluster_size;
  const double log_term = std::log2(1.0 + params.y / d);
  if (const auto* fixed = std::get_if<FixedCost>(&params.cost)) {
    return log_term / (2.0 * n) - (n - 1.0) * fixed->rc;
  }
  const double alpha = std::get<ProportionalCost>(params.cost).alpha;
  return (1.0 - alpha * n * (n - 1.0)) / (2.0 * n) * log_term;
}

int feasible_range(const RateParams& params) {
  params.validate();
  int best = 0;
  for (int n = 1; n <= params.total_links; ++n) {
    if (denominator(params, n) > 0.0) best = n;
    else break;  // denominator is decreasing in N
  }
  if (best == 0) {
    throw InfeasibleNetwork("no feasible cluster size: 1 + M*y_bar - y <= 0");
  }
  return best;
}

ClusterOptimum optimal_cluster_size(const RateParams& params) {
  const int n_max = feasible_range(params);
  ClusterOptimum best{1, *rate_per_member(params, 1)};
  for (int n = 2; n <= n_max; ++n) {
    const double r = *rate_per_member(params, n);
    if (r > best.rate) best = ClusterOptimum{n, r};
  }
  return best;
}

double stationarity_residual(const RateParams& params, double cluster_size) {
  params.validate();
  require_size(params, cluster_size);
  const double n = cluster_size;
  const double d = denominator(params, n);
  const double d_shift = d + params.y;
  if (!(d > 0.0) || !(d_shift > 0.0)) {
    throw DomainError("nonpositive denominator at N = " + std::to_string(n));
  }
  const double log_term = std::log1p(params.y / d);
  // d/dN ln(1 + y/D(N)) with D'(N) = -(y + y_bar).
  const double log_slope = params.y * (params.y + params.y_bar) / (d * d_shift);

  if (const auto* fixed = std::get_if<FixedCost>(&params.cost)) {
    const double rhs = log_slope / (2.0 * n) - log_term / (2.0 * n * n);
    return rhs - fixed->rc * std::log(2.0);
  }
  const double alpha = std::get<ProportionalCost>(params.cost).alpha;
  const double rhs = n * (1.0 - alpha * n * (n - 1.0)) * log_slope /
                     (1.0 + alpha * n * n);
  return rhs - log_term;
}

std::optional<double> bracket_stationary_point(const RateParams& params) {
  const int n_max = feasible_range(params);
  if (n_max < 2) return std::nullopt;

  double lo = 1.0;
  double f_lo = stationarity_residual(params, lo);
  for (int n = 2; n <= n_max; ++n) {
    const double hi_start = n;
    const double f_hi = stationarity_residual(params, hi_start);
    if ((f_lo > 0.0) != (f_hi > 0.0)) {
      const bool lo_positive = f_lo > 0.0;
      double hi = hi_start;
      while (hi - lo > kBisectionTolerance) {
        const double mid = 0.5 * (lo + hi);
        if ((stationarity_residual(params, mid) > 0.0) == lo_positive) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      return 0.5 * (lo + hi);
    }
    lo = hi_start;
    f_lo = f_hi;
  }
  return std::nullopt;
}

}  // namespace coalition::rate
