#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "coalition/chain_model.hpp"
#include "coalition/netsim.hpp"

/// Executable coalition formation protocol.
///
/// A state holds a partition of the active links into coalitions. Each
/// coalition is represented by its head. The heads currently negotiating form
/// the negotiation cluster, whose size is the chain level; the other heads wait
/// in the standby pool. One call to step() is one negotiation round of fixed
/// duration.
namespace coalition::cfp {

using netsim::LinkId;

// Proposer rules.
struct AboveOwnLevel {};   ///< a target whose level exceeds the own useful signal
struct MaxInterferer {};   ///< the strongest interferer
struct WithinDelta {       ///< a target at most `delta` list positions below own
  int delta = 1;
};
struct RandomTarget {};    ///< any other negotiator

// Acceptor-only rule: tentatively merge, keep the coalition only if every
// member of the merged coalition benefits.
struct Experiential {};

using ProposerRule = std::variant<AboveOwnLevel, MaxInterferer, WithinDelta, RandomTarget>;
using AcceptorRule = std::variant<AboveOwnLevel, MaxInterferer, WithinDelta, Experiential>;

struct Rules {
  ProposerRule proposer = AboveOwnLevel{};
  AcceptorRule acceptor = AboveOwnLevel{};
};

/// How a merged coalition appears on other receivers' interference lists.
enum class CoalitionRepresentation { HeadLevel, SumLevel };

/// Statistical model: lists are fresh random permutations every round.
struct AbstractModel {
  chain::VisibilityModel visibility = chain::FullyCorrelated{};
};

/// Lists come from the received levels of a concrete network.
struct GeometricModel {
  std::shared_ptr<const netsim::Network> network;
  double signaling_rate = 0.0;  ///< R_S used by the experiential acceptor
};

using Model = std::variant<AbstractModel, GeometricModel>;

enum class EventKind { Merged, Rejected, Stalled };

struct StepEvent {
  EventKind kind = EventKind::Stalled;
  std::uint64_t round = 0;  ///< 1-based index of the round this event closed
  int level_before = 0;
  int level_after = 0;
  LinkId initiator = 0;
  std::optional<LinkId> target;
  bool replaced = false;  ///< rejecting coalition swapped for a standby link
  int own_depth = 0;      ///< entries below the initiator's own signal
};

std::string to_string(EventKind kind);

/// Bernoulli link arrival/departure applied after each round.
struct Dynamics {
  double arrival_prob = 0.0;
  double departure_prob = 0.0;
};

class CfpState {
 public:
  /// N randomly selected singletons negotiate; the rest of the network waits
  /// in the standby pool. Abstract models use link ids 0..M-1 (M = N for the
  /// fully correlated model). Throws DomainError for N < 1 or N > M, and for
  /// the experiential acceptor on an abstract model.
  static CfpState init(Model model, int cluster_size, Rules rules,
                       CoalitionRepresentation repr, std::uint64_t seed);

  int level() const { return static_cast<int>(cluster_.size()); }
  std::uint64_t round() const { return round_; }
  bool absorbed() const { return level() <= 1; }

  const std::map<LinkId, std::vector<LinkId>>& coalitions() const { return coalitions_; }
  const std::vector<LinkId>& negotiation_cluster() const { return cluster_; }
  const std::vector<LinkId>& standby_pool() const { return pool_; }
  const std::vector<LinkId>& members_of(LinkId head) const;
  bool is_active(LinkId link) const;
  /// Links currently in the network (members of any coalition).
  std::size_t population() const { return population_; }
  const Model& model() const { return model_; }

  /// One negotiation round. Throws AlreadyAbsorbed at level 1.
  StepEvent step();

  /// A link joins the negotiation cluster (level + 1). Geometric models draw
  /// it from the standby pool, which must be nonempty; abstract models create
  /// a new link.
  void apply_arrival();

  /// A uniformly chosen negotiator leaves the network. A multi-member
  /// coalition keeps negotiating under its lowest-id survivor; a departing
  /// singleton lowers the level by one. Throws DomainError at level 1.
  void apply_departure();

  /// Draws one arrival and one departure attempt with the given
  /// probabilities. Arrivals are skipped when the standby pool of a geometric
  /// model is empty; departures need level >= 2.
  void apply_dynamics(const Dynamics& dynamics);

  /// Empty when the partition invariants hold, otherwise a description.
  std::optional<std::string> find_invariant_violation() const;

 private:
  CfpState() = default;

  struct ListView {
    std::vector<LinkId> order;           // weakest first
    std::vector<std::uint8_t> visible;   // parallel to order
    std::size_t own_pos = 0;             // 0-based
  };

  ListView initiator_list(LinkId initiator);
  ListView acceptor_list(LinkId target, int own_depth);
  double level_at(LinkId rx_head, LinkId coalition_head) const;
  std::optional<LinkId> choose_target(const ListView& list);
  bool accepts(const ListView& list, LinkId initiator, LinkId target) const;
  bool experiential_accepts(LinkId initiator, LinkId target) const;
  void merge(LinkId keep_head, LinkId absorbed_head);
  std::size_t uniform_index(std::size_t n);

  const netsim::Network* network() const;

  Model model_;
  Rules rules_;
  CoalitionRepresentation repr_ = CoalitionRepresentation::HeadLevel;
  std::map<LinkId, std::vector<LinkId>> coalitions_;
  std::vector<LinkId> cluster_;
  std::vector<LinkId> pool_;
  std::vector<std::uint8_t> active_;  // indexed by link id
  std::size_t population_ = 0;
  LinkId next_link_ = 0;              // abstract arrivals
  std::uint64_t round_ = 0;
  std::mt19937_64 rng_;
};

struct LevelCounts {
  std::uint64_t stay = 0;
  std::uint64_t advance = 0;

  std::uint64_t visits() const { return stay + advance; }
  double advance_frequency() const;
  /// Binomial standard error of the frequency.
  double standard_error() const;
};

struct Trace {
  std::optional<std::uint64_t> rounds;  ///< nullopt on timeout
  std::vector<StepEvent> log;
  std::map<int, LevelCounts> transitions;  ///< stay/advance per level
};

/// Steps until the grand coalition forms or `max_rounds` rounds have run.
/// With nonzero dynamics an arrival and a departure are each attempted with
/// their probability after every round.
Trace run(CfpState& state, std::uint64_t max_rounds, Dynamics dynamics = {},
          bool keep_log = true);

/// CSV header `round,level_before,event,initiator,target,level_after`.
void write_trace_csv(std::ostream& out, const Trace& trace);

struct RandomPlacement {
  int link_count = 0;
  netsim::PlacementConfig placement;
  double signaling_rate = 0.0;
};

struct MonteCarloConfig {
  Model model = AbstractModel{};
  /// Geometric runs on a fresh network per run; overrides `model`.
  std::optional<RandomPlacement> placement;
  int cluster_size = 2;
  Rules rules;
  CoalitionRepresentation repr = CoalitionRepresentation::HeadLevel;
  std::uint64_t runs = 1;
  std::uint64_t max_rounds = 1'000'000;
  std::uint64_t seed = 1;
  Dynamics dynamics;
  unsigned threads = 0;  ///< 0 = hardware concurrency
};

struct RunStats {
  std::vector<std::optional<std::uint64_t>> samples;  ///< per run, nullopt = timeout
  std::map<int, LevelCounts> transitions;             ///< keyed by level
  std::uint64_t completed = 0;
  std::uint64_t timeouts = 0;
  double mean_rounds = 0.0;
  double var_rounds = 0.0;   ///< unbiased sample variance
  double se_mean = 0.0;
  double se_var = 0.0;       ///< large-sample standard error of the variance
};

/// Seed of run `index` derived from the master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Initial state of run `index`, exactly as monte_carlo() builds it.
CfpState init_run(const MonteCarloConfig& config, std::uint64_t index);

/// Independent runs, possibly in parallel; the result depends only on the
/// config.
RunStats monte_carlo(const MonteCarloConfig& config);

/// Moments of the completed samples (helper shared with the reporting code).
void summarize(RunStats& stats);

}  // namespace coalition::cfp
