#include "coalition/cfp_engine.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>
#include <set>
#include <thread>

namespace coalition::cfp {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void erase_value(std::vector<LinkId>& v, LinkId value) {
  v.erase(std::remove(v.begin(), v.end(), value), v.end());
}

std::size_t index_of(const std::vector<LinkId>& v, LinkId value) {
  return static_cast<std::size_t>(std::find(v.begin(), v.end(), value) - v.begin());
}

}  // namespace

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Merged: return "merged";
    case EventKind::Rejected: return "rejected";
    case EventKind::Stalled: return "stalled";
  }
  return "unknown";
}

CfpState CfpState::init(Model model, int cluster_size, Rules rules,
                        CoalitionRepresentation repr, std::uint64_t seed) {
  if (cluster_size < 1) throw DomainError("cluster size must be >= 1");

  const auto check_delta = [](const auto& rule) {
    if constexpr (std::is_same_v<std::decay_t<decltype(rule)>, WithinDelta>) {
      if (rule.delta < 1) throw DomainError("delta must be >= 1");
    }
  };
  std::visit(check_delta, rules.proposer);
  std::visit(check_delta, rules.acceptor);

  std::size_t total = 0;
  if (const auto* abstract = std::get_if<AbstractModel>(&model)) {
    if (std::holds_alternative<Experiential>(rules.acceptor)) {
      throw DomainError("the experiential acceptor needs a geometric model");
    }
    if (const auto* pcn = std::get_if<chain::PartiallyCorrelated>(&abstract->visibility)) {
      if (cluster_size > pcn->total_links) {
        throw DomainError("N exceeds M (N = " + std::to_string(cluster_size) +
                          ", M = " + std::to_string(pcn->total_links) + ")");
      }
      total = static_cast<std::size_t>(pcn->total_links);
    } else {
      total = static_cast<std::size_t>(cluster_size);
    }
  } else {
    const auto& geo = std::get<GeometricModel>(model);
    if (!geo.network) throw DomainError("geometric model without a network");
    if (!(geo.signaling_rate >= 0.0)) throw DomainError("signaling rate must be >= 0");
    total = geo.network->size();
    if (static_cast<std::size_t>(cluster_size) > total) {
      throw DomainError("N exceeds M (N = " + std::to_string(cluster_size) +
                        ", M = " + std::to_string(total) + ")");
    }
  }

  CfpState state;
  state.model_ = std::move(model);
  state.rules_ = rules;
  state.repr_ = repr;
  state.rng_.seed(seed);
  state.population_ = total;
  state.next_link_ = static_cast<LinkId>(total);
  state.active_.assign(total, 1);

  std::vector<LinkId> ids(total);
  for (std::size_t i = 0; i < total; ++i) {
    ids[i] = static_cast<LinkId>(i);
    state.coalitions_[ids[i]] = {ids[i]};
  }
  std::shuffle(ids.begin(), ids.end(), state.rng_);
  state.cluster_.assign(ids.begin(), ids.begin() + cluster_size);
  state.pool_.assign(ids.begin() + cluster_size, ids.end());
  return state;
}

const std::vector<LinkId>& CfpState::members_of(LinkId head) const {
  const auto it = coalitions_.find(head);
  if (it == coalitions_.end()) {
    throw DomainError("link " + std::to_string(head) + " is not a coalition head");
  }
  return it->second;
}

bool CfpState::is_active(LinkId link) const {
  return link < active_.size() && active_[link] != 0;
}

const netsim::Network* CfpState::network() const {
  if (const auto* geo = std::get_if<GeometricModel>(&model_)) return geo->network.get();
  return nullptr;
}

std::size_t CfpState::uniform_index(std::size_t n) {
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  return pick(rng_);
}

double CfpState::level_at(LinkId rx_head, LinkId coalition_head) const {
  const auto& net = *network();
  if (rx_head == coalition_head || repr_ == CoalitionRepresentation::HeadLevel) {
    return net.received(rx_head, coalition_head);
  }
  double sum = 0.0;
  for (LinkId member : coalitions_.at(coalition_head)) {
    sum += net.received(rx_head, member);
  }
  return sum;
}

CfpState::ListView CfpState::initiator_list(LinkId initiator) {
  ListView view;
  if (network() == nullptr) {
    view.order = cluster_;
    std::shuffle(view.order.begin(), view.order.end(), rng_);
  } else {
    std::vector<netsim::ListEntry> entries;
    entries.reserve(cluster_.size());
    for (LinkId head : cluster_) entries.push_back({head, level_at(initiator, head)});
    const auto list = netsim::make_ordered_list(initiator, std::move(entries));
    for (const auto& e : list.entries) view.order.push_back(e.link);
  }
  view.visible.assign(view.order.size(), 1);
  view.own_pos = index_of(view.order, initiator);
  return view;
}

CfpState::ListView CfpState::acceptor_list(LinkId target, int own_depth) {
  ListView view = initiator_list(target);
  if (const auto* abstract = std::get_if<AbstractModel>(&model_)) {
    if (std::holds_alternative<chain::PartiallyCorrelated>(abstract->visibility)) {
      // Each slot is seen with probability (m - k) / (M - k), k being the
      // number of entries below the initiator's own signal.
      const double m = level();
      const double total = static_cast<double>(population_);
      const double p_visible =
          std::clamp((m - own_depth) / (total - own_depth), 0.0, 1.0);
      std::bernoulli_distribution seen(p_visible);
      for (auto& v : view.visible) v = seen(rng_) ? 1 : 0;
    }
  }
  return view;
}

std::optional<LinkId> CfpState::choose_target(const ListView& list) {
  std::vector<LinkId> candidates;
  const std::size_t own = list.own_pos;
  const auto visible_peer = [&](std::size_t pos) {
    return pos != own && list.visible[pos] != 0;
  };
  std::visit(Overloaded{
                 [&](const AboveOwnLevel&) {
                   for (std::size_t p = own + 1; p < list.order.size(); ++p) {
                     if (visible_peer(p)) candidates.push_back(list.order[p]);
                   }
                 },
                 [&](const MaxInterferer&) {
                   for (std::size_t p = list.order.size(); p-- > 0;) {
                     if (visible_peer(p)) {
                       candidates.push_back(list.order[p]);
                       break;
                     }
                   }
                 },
                 [&](const WithinDelta& rule) {
                   const std::size_t delta = static_cast<std::size_t>(rule.delta);
                   const std::size_t lowest = own >= delta ? own - delta : 0;
                   for (std::size_t p = lowest; p < list.order.size(); ++p) {
                     if (visible_peer(p)) candidates.push_back(list.order[p]);
                   }
                 },
                 [&](const RandomTarget&) {
                   for (std::size_t p = 0; p < list.order.size(); ++p) {
                     if (p != own) candidates.push_back(list.order[p]);
                   }
                 },
             },
             rules_.proposer);
  if (candidates.empty()) return std::nullopt;
  return candidates[uniform_index(candidates.size())];
}

bool CfpState::accepts(const ListView& list, LinkId initiator, LinkId target) const {
  const std::size_t own = list.own_pos;
  const std::size_t pos = index_of(list.order, initiator);
  const bool initiator_seen = list.visible[pos] != 0;
  const bool own_seen = list.visible[own] != 0;
  return std::visit(
      Overloaded{
          [&](const AboveOwnLevel&) { return initiator_seen && own_seen && pos > own; },
          [&](const MaxInterferer&) {
            if (!initiator_seen) return false;
            for (std::size_t p = pos + 1; p < list.order.size(); ++p) {
              if (p != own && list.visible[p] != 0) return false;
            }
            return true;
          },
          [&](const WithinDelta& rule) {
            return initiator_seen && own_seen &&
                   pos + static_cast<std::size_t>(rule.delta) >= own;
          },
          [&](const Experiential&) { return experiential_accepts(initiator, target); },
      },
      rules_.acceptor);
}

bool CfpState::experiential_accepts(LinkId initiator, LinkId target) const {
  const auto& geo = std::get<GeometricModel>(model_);
  std::vector<LinkId> merged = coalitions_.at(initiator);
  const auto& other = coalitions_.at(target);
  merged.insert(merged.end(), other.begin(), other.end());
  return netsim::coalition_benefit_check(*geo.network, merged, geo.signaling_rate,
                                         active_);
}

void CfpState::merge(LinkId keep_head, LinkId absorbed_head) {
  auto& keep = coalitions_.at(keep_head);
  const auto& gone = coalitions_.at(absorbed_head);
  keep.insert(keep.end(), gone.begin(), gone.end());
  std::sort(keep.begin(), keep.end());
  coalitions_.erase(absorbed_head);
  erase_value(cluster_, absorbed_head);
}

StepEvent CfpState::step() {
  if (absorbed()) throw AlreadyAbsorbed("the grand coalition has already formed");

  StepEvent event;
  event.level_before = level();
  event.initiator = cluster_[uniform_index(cluster_.size())];

  const ListView own_list = initiator_list(event.initiator);
  event.own_depth = static_cast<int>(own_list.own_pos);
  event.target = choose_target(own_list);

  if (!event.target) {
    event.kind = EventKind::Stalled;
  } else {
    const LinkId target = *event.target;
    const ListView target_list = acceptor_list(target, event.own_depth);
    if (accepts(target_list, event.initiator, target)) {
      merge(event.initiator, target);
      event.kind = EventKind::Merged;
    } else {
      event.kind = EventKind::Rejected;
      if (!pool_.empty()) {
        const std::size_t slot = uniform_index(pool_.size());
        cluster_[index_of(cluster_, target)] = pool_[slot];
        pool_[slot] = target;
        event.replaced = true;
      }
    }
  }
  event.level_after = level();
  event.round = ++round_;
  return event;
}

void CfpState::apply_arrival() {
  if (network() != nullptr) {
    if (pool_.empty()) throw DomainError("arrival needs a nonempty standby pool");
    const std::size_t slot = uniform_index(pool_.size());
    cluster_.push_back(pool_[slot]);
    pool_.erase(pool_.begin() + static_cast<std::ptrdiff_t>(slot));
    return;
  }
  const LinkId fresh = next_link_++;
  active_.push_back(1);
  coalitions_[fresh] = {fresh};
  cluster_.push_back(fresh);
  ++population_;
}

void CfpState::apply_departure() {
  if (level() < 2) throw DomainError("departure needs level >= 2");
  const std::size_t slot = uniform_index(cluster_.size());
  const LinkId leaving = cluster_[slot];

  auto members = std::move(coalitions_.at(leaving));
  coalitions_.erase(leaving);
  erase_value(members, leaving);
  active_[leaving] = 0;
  --population_;

  if (members.empty()) {
    cluster_.erase(cluster_.begin() + static_cast<std::ptrdiff_t>(slot));
    return;
  }
  const LinkId new_head = members.front();
  coalitions_[new_head] = std::move(members);
  cluster_[slot] = new_head;
}

void CfpState::apply_dynamics(const Dynamics& dynamics) {
  if (dynamics.arrival_prob > 0.0) {
    std::bernoulli_distribution arrive(std::min(dynamics.arrival_prob, 1.0));
    if (arrive(rng_) && (network() == nullptr || !pool_.empty())) apply_arrival();
  }
  if (dynamics.departure_prob > 0.0) {
    std::bernoulli_distribution depart(std::min(dynamics.departure_prob, 1.0));
    if (depart(rng_) && level() >= 2) apply_departure();
  }
}

std::optional<std::string> CfpState::find_invariant_violation() const {
  if (cluster_.empty()) return "negotiation cluster is empty";

  std::set<LinkId> seen;
  for (const auto& [head, members] : coalitions_) {
    if (std::find(members.begin(), members.end(), head) == members.end()) {
      return "head " + std::to_string(head) + " is not a member of its coalition";
    }
    if (!std::is_sorted(members.begin(), members.end())) {
      return "members of " + std::to_string(head) + " are not sorted";
    }
    for (LinkId m : members) {
      if (!seen.insert(m).second) {
        return "link " + std::to_string(m) + " belongs to two coalitions";
      }
      if (!is_active(m)) return "inactive link " + std::to_string(m) + " in a coalition";
    }
  }
  if (seen.size() != population_) return "coalitions do not cover the active links";
  for (LinkId id = 0; id < active_.size(); ++id) {
    if (active_[id] && !seen.count(id)) {
      return "active link " + std::to_string(id) + " has no coalition";
    }
  }

  std::set<LinkId> heads;
  for (const auto* group : {&cluster_, &pool_}) {
    for (LinkId h : *group) {
      if (!coalitions_.count(h)) return "link " + std::to_string(h) + " is not a head";
      if (!heads.insert(h).second) {
        return "head " + std::to_string(h) + " listed twice in cluster/pool";
      }
    }
  }
  if (heads.size() != coalitions_.size()) {
    return "some coalition is neither negotiating nor on standby";
  }
  return std::nullopt;
}

double LevelCounts::advance_frequency() const {
  return visits() == 0 ? 0.0 : static_cast<double>(advance) / static_cast<double>(visits());
}

double LevelCounts::standard_error() const {
  if (visits() == 0) return 0.0;
  const double p = advance_frequency();
  return std::sqrt(p * (1.0 - p) / static_cast<double>(visits()));
}

Trace run(CfpState& state, std::uint64_t max_rounds, Dynamics dynamics, bool keep_log) {
  Trace trace;
  std::uint64_t executed = 0;
  while (!state.absorbed() && executed < max_rounds) {
    const StepEvent event = state.step();
    ++executed;
    auto& counts = trace.transitions[event.level_before];
    if (event.kind == EventKind::Merged) ++counts.advance;
    else ++counts.stay;
    if (keep_log) trace.log.push_back(event);
    if (!state.absorbed()) state.apply_dynamics(dynamics);
  }
  if (state.absorbed()) trace.rounds = executed;
  return trace;
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << "round,level_before,event,initiator,target,level_after\n";
  for (const auto& e : trace.log) {
    out << e.round << ',' << e.level_before << ',' << to_string(e.kind) << ','
        << e.initiator << ',';
    if (e.target) out << *e.target;
    out << ',' << e.level_after << '\n';
  }
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

void summarize(RunStats& stats) {
  stats.completed = 0;
  stats.timeouts = 0;
  double sum = 0.0;
  for (const auto& s : stats.samples) {
    if (s) {
      ++stats.completed;
      sum += static_cast<double>(*s);
    } else {
      ++stats.timeouts;
    }
  }
  stats.mean_rounds = stats.var_rounds = stats.se_mean = stats.se_var = 0.0;
  if (stats.completed == 0) return;
  const double n = static_cast<double>(stats.completed);
  stats.mean_rounds = sum / n;
  double m2 = 0.0;
  double m4 = 0.0;
  for (const auto& s : stats.samples) {
    if (!s) continue;
    const double d = static_cast<double>(*s) - stats.mean_rounds;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  if (stats.completed > 1) {
    stats.var_rounds = m2 / (n - 1.0);
    stats.se_mean = std::sqrt(stats.var_rounds / n);
    const double c2 = m2 / n;
    const double c4 = m4 / n;
    stats.se_var = std::sqrt(std::max(0.0, c4 - c2 * c2) / n);
  }
}

CfpState init_run(const MonteCarloConfig& config, std::uint64_t index) {
  const std::uint64_t run_seed = derive_seed(config.seed, index);
  Model model = config.model;
  if (config.placement) {
    auto placement = config.placement->placement;
    placement.seed = derive_seed(run_seed, 0);
    model = GeometricModel{
        std::make_shared<const netsim::Network>(
            netsim::generate_network(config.placement->link_count, placement)),
        config.placement->signaling_rate};
  }
  return CfpState::init(std::move(model), config.cluster_size, config.rules, config.repr,
                        run_seed);
}

RunStats monte_carlo(const MonteCarloConfig& config) {
  if (config.runs < 1) throw DomainError("runs must be >= 1");

  RunStats stats;
  stats.samples.resize(config.runs);

  unsigned threads = config.threads != 0 ? config.threads
                                         : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, config.runs));

  std::vector<std::map<int, LevelCounts>> partial(threads);
  std::vector<std::exception_ptr> errors(threads);

  const auto worker = [&](unsigned t) {
    try {
      for (std::uint64_t i = t; i < config.runs; i += threads) {
        auto state = init_run(config, i);
        const Trace trace = run(state, config.max_rounds, config.dynamics, false);
        stats.samples[i] = trace.rounds;
        for (const auto& [level, counts] : trace.transitions) {
          partial[t][level].stay += counts.stay;
          partial[t][level].advance += counts.advance;
        }
      }
    } catch (...) {
      errors[t] = std::current_exception();
    }
  };

  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (const auto& counts_by_level : partial) {
    for (const auto& [level, counts] : counts_by_level) {
      stats.transitions[level].stay += counts.stay;
      stats.transitions[level].advance += counts.advance;
    }
  }
  summarize(stats);
  return stats;
}

}  // namespace coalition::cfp
