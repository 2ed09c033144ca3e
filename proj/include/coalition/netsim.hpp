#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "coalition/errors.hpp"

/// Geometric interference networks and the physical-layer quantities used by
/// the coalition protocol: channel gains, SINR, Shannon rates and ordered
/// interference lists.
namespace coalition::netsim {

using LinkId = std::uint32_t;

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

double distance(Point a, Point b);

struct LinkGeometry {
  Point tx;
  Point rx;
  double power = 1.0;  ///< watts

  bool operator==(const LinkGeometry&) const = default;
};

/// Immutable set of M links with a dense gain matrix.
///
/// gain(i, j) is the linear gain from the transmitter of link j to the
/// receiver of link i, so received power at rx_i from tx_j is
/// gain(i, j) * power(j).
class Network {
 public:
  /// Pure path loss g = d^-eta.
  static Network from_geometry(std::vector<LinkGeometry> links,
                               double path_loss_exponent, double noise);

  /// Gain-only network for hand-built fixtures; `gains` is row-major M x M.
  static Network from_gains(std::vector<double> gains, std::vector<double> powers,
                            double noise);

  std::size_t size() const { return powers_.size(); }
  double gain(LinkId rx, LinkId tx) const { return gains_[rx * size() + tx]; }
  double power(LinkId link) const { return powers_[link]; }
  double noise() const { return noise_; }
  double received(LinkId rx, LinkId tx) const { return gain(rx, tx) * power(tx); }

  /// Empty for networks built from gains.
  const std::vector<LinkGeometry>& links() const { return links_; }
  double path_loss_exponent() const { return path_loss_exponent_; }

  bool operator==(const Network&) const = default;

 private:
  Network() = default;

  std::vector<LinkGeometry> links_;
  std::vector<double> gains_;
  std::vector<double> powers_;
  double noise_ = 0.0;
  double path_loss_exponent_ = 0.0;
};

struct PlacementConfig {
  double width = 100.0;
  double height = 100.0;
  double d_max = 10.0;  ///< max tx -> rx separation
  double path_loss_exponent = 3.5;
  double tx_power = 1.0;
  double noise = 1e-4;
  std::uint64_t seed = 1;

  /// Throws ConfigError for nonpositive sizes or d_max >= min(width, height).
  void validate() const;
};

/// Transmitters uniform on the rectangle; each receiver uniform in the disk
/// of radius d_max around its transmitter, resampled until inside the
/// rectangle. Deterministic in (M, placement).
Network generate_network(int link_count, const PlacementConfig& placement);

/// Links with a nonzero mask entry transmit. An empty mask means all do.
using ActiveMask = std::span<const std::uint8_t>;

/// Signal over noise plus interference from the given transmitters.
double sinr(const Network& net, LinkId r, std::span<const LinkId> interferers);

/// SINR of link r when every other (active) link transmits simultaneously.
double sinr_all_active(const Network& net, LinkId r, ActiveMask active = {});

/// (1/2) log2(1 + sinr). Negative input is a DomainError.
double rate_spread(double sinr_value);

/// Rate of member r of coalition S under even 1/|S| time sharing: only the
/// links outside S interfere, and the signaling rate is subtracted.
double coalition_rate(const Network& net, LinkId r, std::span<const LinkId> coalition,
                      double signaling_rate, ActiveMask active = {});

/// True iff every member of S does at least as well inside the coalition as
/// when spreading over the whole band.
bool coalition_benefit_check(const Network& net, std::span<const LinkId> coalition,
                             double signaling_rate, ActiveMask active = {});

struct ListEntry {
  LinkId link = 0;
  double level = 0.0;  ///< received power at the owner's receiver

  bool operator==(const ListEntry&) const = default;
};

/// Received levels at one receiver, weakest first. `own_index` is 1-based:
/// 1 means the owner's useful signal is the weakest entry.
struct OrderedInterferenceList {
  LinkId owner = 0;
  std::vector<ListEntry> entries;
  std::size_t own_index = 1;

  std::size_t position_of(LinkId link) const;  ///< 1-based; 0 when absent
  bool operator==(const OrderedInterferenceList&) const = default;
};

/// Sorts entries ascending by level, ties by link id, and locates the owner.
/// The owner must appear exactly once.
OrderedInterferenceList make_ordered_list(LinkId owner, std::vector<ListEntry> entries);

/// Ordered list of the levels g_ij P_j for j in the cluster, own included.
OrderedInterferenceList interference_list(const Network& net, LinkId i,
                                          std::span<const LinkId> cluster);

struct VisibilityGapReport {
  std::vector<int> per_link;       ///< a_i
  std::vector<std::uint64_t> histogram;  ///< counts of a over {0..N}
};

/// For each link, L(i) holds its N strongest interferers (capped at M - 1).
/// a_i counts members j of L(i) whose own list does not contain i.
VisibilityGapReport empirical_visibility_gap(const Network& net, int cluster_size);

/// CSV with header `id,tx_x,tx_y,rx_x,rx_y,P`, one row per link. Networks
/// built from gains cannot be written.
void write_network_csv(std::ostream& out, const Network& net);
Network read_network_csv(std::istream& in, double path_loss_exponent, double noise);

}  // namespace coalition::netsim
