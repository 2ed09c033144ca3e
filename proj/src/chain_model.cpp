#include "coalition/chain_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace coalition::chain {

namespace {

constexpr double kIdentityTolerance = 1e-12;

void require_cluster(int cluster_size) {
  if (cluster_size < 1) {
    throw DomainError("cluster size must be >= 1, got " +
                      std::to_string(cluster_size));
  }
}

void require_cluster_within_network(int total_links, int cluster_size) {
  require_cluster(cluster_size);
  if (cluster_size > total_links) {
    throw DomainError("N exceeds M (N = " + std::to_string(cluster_size) +
                      ", M = " + std::to_string(total_links) + ")");
  }
}

void require_gap(int cluster_size, int gap) {
  if (gap < 0 || gap > cluster_size) {
    throw DomainError("visibility gap a = " + std::to_string(gap) +
                      " outside [0, " + std::to_string(cluster_size) + "]");
  }
}

// C(n, k) in floating point; exact for the n <= 64 range we care about
// up to the 53-bit mantissa.
double binomial_coefficient(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  if (k > n - k) k = n - k;
  double c = 1.0;
  for (int i = 1; i <= k; ++i) {
    c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return std::round(c);
}

LevelTransition from_advance(int level, double advance) {
  return LevelTransition{level, 1.0 - advance, advance};
}

}  // namespace

double correlation(int gap, int cluster_size) {
  require_cluster(cluster_size);
  require_gap(cluster_size, gap);
  return 1.0 - static_cast<double>(gap) / static_cast<double>(cluster_size);
}

std::vector<double> visibility_gap_pmf(int total_links, int cluster_size) {
  require_cluster_within_network(total_links, cluster_size);
  const double p = 1.0 - static_cast<double>(cluster_size) /
                             static_cast<double>(total_links);
  std::vector<double> pmf(static_cast<std::size_t>(cluster_size) + 1, 0.0);
  for (int a = 0; a <= cluster_size; ++a) {
    // std::pow(0.0, 0) == 1, which gives the point mass at a = 0 when M = N.
    pmf[static_cast<std::size_t>(a)] = binomial_coefficient(cluster_size, a) *
                                       std::pow(p, a) *
                                       std::pow(1.0 - p, cluster_size - a);
  }
  return pmf;
}

double acceptance_prob_fcn(int cluster_size) {
  require_cluster(cluster_size);
  return cluster_size >= 2 ? 0.5 : 0.0;
}

double acceptance_prob_pcn_fixed_a(int cluster_size, int gap) {
  require_cluster(cluster_size);
  require_gap(cluster_size, gap);
  if (cluster_size == 1 || cluster_size <= gap) return 0.0;
  const double visible = cluster_size - gap;
  const double n = cluster_size;
  return visible * (visible - 1.0) / (2.0 * n * (n - 1.0));
}

double acceptance_prob_pcn_binomial_average(int total_links, int cluster_size) {
  const auto gap_pmf = visibility_gap_pmf(total_links, cluster_size);
  if (cluster_size == 1) return 0.0;
  double sum = 0.0;
  for (int a = 0; a <= cluster_size; ++a) {
    sum += gap_pmf[static_cast<std::size_t>(a)] *
           acceptance_prob_pcn_fixed_a(cluster_size, a);
  }
  return sum;
}

double acceptance_prob_pcn_closed_form(int total_links, int cluster_size) {
  require_cluster_within_network(total_links, cluster_size);
  if (cluster_size == 1) return 0.0;
  const double ratio =
      static_cast<double>(cluster_size) / static_cast<double>(total_links);
  return 0.5 * ratio * ratio;
}

double acceptance_prob_pcn(int total_links, int cluster_size) {
  const double averaged =
      acceptance_prob_pcn_binomial_average(total_links, cluster_size);
  const double closed = acceptance_prob_pcn_closed_form(total_links, cluster_size);
  if (std::abs(averaged - closed) > kIdentityTolerance) {
    throw std::logic_error("binomial average and closed form disagree for M = " +
                           std::to_string(total_links) +
                           ", N = " + std::to_string(cluster_size));
  }
  return closed;
}

LevelTransition transition_fcn(int level) {
  require_cluster(level);
  const double n = level;
  return from_advance(level, (n - 1.0) / (2.0 * n));
}

LevelTransition transition_pcn(int total_links, int level) {
  require_cluster_within_network(total_links, level);
  if (level == 1) return from_advance(1, 0.0);
  // Own position k on the list removes the k weaker entries from both the
  // cluster and the population: sum over ((N-k)/(M-k))^2.
  double sum = 0.0;
  for (int k = 0; k <= level - 2; ++k) {
    const double ratio = static_cast<double>(level - k) /
                         static_cast<double>(total_links - k);
    sum += ratio * ratio;
  }
  return from_advance(level, sum / (2.0 * level));
}

LevelTransition transition(const VisibilityModel& model, int level) {
  if (const auto* pcn = std::get_if<PartiallyCorrelated>(&model)) {
    return transition_pcn(pcn->total_links, level);
  }
  return transition_fcn(level);
}

StayBounds pcn_stay_bounds(int total_links, int cluster_size) {
  require_cluster_within_network(total_links, cluster_size);
  if (cluster_size < 2) {
    throw DomainError("stay bounds need N >= 2");
  }
  const double n = cluster_size;
  const double m2 = static_cast<double>(total_links) * total_links;
  return StayBounds{1.0 - n * (n - 1.0) / (2.0 * m2), 1.0 - n * n / (4.0 * m2)};
}

ClusterChain build_chain(const VisibilityModel& model, int cluster_size,
                         double round_duration) {
  require_cluster(cluster_size);
  if (!(round_duration > 0.0)) {
    throw DomainError("round duration must be positive");
  }
  if (const auto* pcn = std::get_if<PartiallyCorrelated>(&model)) {
    require_cluster_within_network(pcn->total_links, cluster_size);
  }
  ClusterChain chain;
  chain.round_duration = round_duration;
  for (int level = cluster_size; level >= 2; --level) {
    chain.transitions.push_back(transition(model, level));
  }
  return chain;
}

AbsorptionStats absorption_stats(const ClusterChain& chain) {
  AbsorptionStats stats;
  for (const auto& t : chain.transitions) {
    if (!(t.advance > 0.0)) {
      throw NonAbsorbingChain("level " + std::to_string(t.level) +
                              " has zero advance probability");
    }
    stats.mean_rounds += 1.0 / t.advance;
    stats.var_rounds += (1.0 - t.advance) / (t.advance * t.advance);
  }
  stats.mean_time = chain.round_duration * stats.mean_rounds;
  stats.var_time = chain.round_duration * chain.round_duration * stats.var_rounds;
  return stats;
}

AbsorptionPmf absorption_pmf(const ClusterChain& chain, int max_rounds) {
  if (max_rounds < 0) {
    throw DomainError("max_rounds must be >= 0");
  }
  for (const auto& t : chain.transitions) {
    if (!(t.advance > 0.0)) {
      throw NonAbsorbingChain("level " + std::to_string(t.level) +
                              " has zero advance probability");
    }
  }
  AbsorptionPmf out;
  out.pmf.assign(static_cast<std::size_t>(max_rounds) + 1, 0.0);
  if (chain.transitions.empty()) {
    out.pmf[0] = 1.0;
    return out;
  }

  // occupancy[i] is the mass at transitions[i].level.
  std::vector<double> occupancy(chain.transitions.size(), 0.0);
  occupancy[0] = 1.0;
  for (int round = 1; round <= max_rounds; ++round) {
    double absorbed = 0.0;
    std::vector<double> next(occupancy.size(), 0.0);
    for (std::size_t i = 0; i < occupancy.size(); ++i) {
      const auto& t = chain.transitions[i];
      next[i] += occupancy[i] * t.stay;
      const double moved = occupancy[i] * t.advance;
      if (i + 1 < occupancy.size()) {
        next[i + 1] += moved;
      } else {
        absorbed += moved;
      }
    }
    occupancy = std::move(next);
    out.pmf[static_cast<std::size_t>(round)] = absorbed;
  }
  for (double mass : occupancy) out.tail += mass;
  return out;
}

}  // namespace coalition::chain
