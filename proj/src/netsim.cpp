#include "coalition/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

namespace coalition::netsim {

namespace {

void require_link(const Network& net, LinkId link) {
  if (link >= net.size()) {
    throw DomainError("link id " + std::to_string(link) + " out of range");
  }
}

bool is_active(ActiveMask active, LinkId link) {
  return active.empty() || active[link] != 0;
}

bool contains(std::span<const LinkId> set, LinkId link) {
  return std::find(set.begin(), set.end(), link) != set.end();
}

double sinr_excluding(const Network& net, LinkId r, std::span<const LinkId> excluded,
                      ActiveMask active) {
  double interference = 0.0;
  for (LinkId i = 0; i < net.size(); ++i) {
    if (i == r || !is_active(active, i) || contains(excluded, i)) continue;
    interference += net.received(r, i);
  }
  return net.received(r, r) / (interference + net.noise());
}

}  // namespace

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

Network Network::from_geometry(std::vector<LinkGeometry> links,
                               double path_loss_exponent, double noise) {
  if (!(path_loss_exponent > 0.0)) throw ConfigError("path-loss exponent must be > 0");
  if (!(noise > 0.0)) throw ConfigError("noise power must be > 0");
  Network net;
  const std::size_t m = links.size();
  net.gains_.resize(m * m);
  net.powers_.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(links[i].power > 0.0)) throw ConfigError("transmit power must be > 0");
    if (!(distance(links[i].tx, links[i].rx) > 0.0)) {
      throw ConfigError("link " + std::to_string(i) + " has tx == rx");
    }
    net.powers_.push_back(links[i].power);
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = distance(links[j].tx, links[i].rx);
      if (!(d > 0.0)) {
        throw ConfigError("transmitter of link " + std::to_string(j) +
                          " coincides with receiver of link " + std::to_string(i));
      }
      net.gains_[i * m + j] = std::pow(d, -path_loss_exponent);
    }
  }
  net.links_ = std::move(links);
  net.noise_ = noise;
  net.path_loss_exponent_ = path_loss_exponent;
  return net;
}

Network Network::from_gains(std::vector<double> gains, std::vector<double> powers,
                            double noise) {
  const std::size_t m = powers.size();
  if (gains.size() != m * m) throw ConfigError("gain matrix must be M x M");
  if (!(noise > 0.0)) throw ConfigError("noise power must be > 0");
  for (double g : gains) {
    if (!(g > 0.0)) throw ConfigError("channel gains must be > 0");
  }
  for (double p : powers) {
    if (!(p > 0.0)) throw ConfigError("transmit power must be > 0");
  }
  Network net;
  net.gains_ = std::move(gains);
  net.powers_ = std::move(powers);
  net.noise_ = noise;
  return net;
}

void PlacementConfig::validate() const {
  if (!(width > 0.0) || !(height > 0.0)) throw ConfigError("area must be positive");
  if (!(d_max > 0.0)) throw ConfigError("d_max must be positive");
  if (!(d_max < std::min(width, height))) {
    throw ConfigError("d_max must be smaller than the rectangle's shorter side");
  }
  if (!(path_loss_exponent > 0.0)) throw ConfigError("path-loss exponent must be > 0");
  if (!(tx_power > 0.0)) throw ConfigError("transmit power must be > 0");
  if (!(noise > 0.0)) throw ConfigError("noise power must be > 0");
}

Network generate_network(int link_count, const PlacementConfig& placement) {
  if (link_count < 1) throw DomainError("network needs at least one link");
  placement.validate();

  std::mt19937_64 rng(placement.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr double kTwoPi = 6.283185307179586;

  std::vector<LinkGeometry> links;
  links.reserve(static_cast<std::size_t>(link_count));
  for (int i = 0; i < link_count; ++i) {
    LinkGeometry link;
    link.power = placement.tx_power;
    link.tx = {unit(rng) * placement.width, unit(rng) * placement.height};
    for (;;) {
      // sqrt of a uniform radius fraction gives a uniform point in the disk.
      const double r = placement.d_max * std::sqrt(unit(rng));
      const double theta = kTwoPi * unit(rng);
      const Point rx{link.tx.x + r * std::cos(theta), link.tx.y + r * std::sin(theta)};
      if (r > 0.0 && rx.x >= 0.0 && rx.x <= placement.width && rx.y >= 0.0 &&
          rx.y <= placement.height) {
        link.rx = rx;
        break;
      }
    }
    links.push_back(link);
  }
  return Network::from_geometry(std::move(links), placement.path_loss_exponent,
                                placement.noise);
}

double sinr(const Network& net, LinkId r, std::span<const LinkId> interferers) {
  require_link(net, r);
  double interference = 0.0;
  for (LinkId i : interferers) {
    require_link(net, i);
    if (i != r) interference += net.received(r, i);
  }
  return net.received(r, r) / (interference + net.noise());
}

double sinr_all_active(const Network& net, LinkId r, ActiveMask active) {
  require_link(net, r);
  return sinr_excluding(net, r, {}, active);
}

double rate_spread(double sinr_value) {
  if (!(sinr_value >= 0.0)) throw DomainError("SINR must be >= 0");
  return 0.5 * std::log2(1.0 + sinr_value);
}

double coalition_rate(const Network& net, LinkId r, std::span<const LinkId> coalition,
                      double signaling_rate, ActiveMask active) {
  require_link(net, r);
  if (!contains(coalition, r)) {
    throw DomainError("link " + std::to_string(r) + " is not a coalition member");
  }
  if (!(signaling_rate >= 0.0)) throw DomainError("signaling rate must be >= 0");
  const double s = sinr_excluding(net, r, coalition, active);
  return std::log2(1.0 + s) / (2.0 * static_cast<double>(coalition.size())) -
         signaling_rate;
}

bool coalition_benefit_check(const Network& net, std::span<const LinkId> coalition,
                             double signaling_rate, ActiveMask active) {
  for (LinkId r : coalition) {
    const double shared = coalition_rate(net, r, coalition, signaling_rate, active);
    const double alone = rate_spread(sinr_all_active(net, r, active));
    if (!(shared >= alone)) return false;
  }
  return true;
}

std::size_t OrderedInterferenceList::position_of(LinkId link) const {
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (entries[k].link == link) return k + 1;
  }
  return 0;
}

OrderedInterferenceList make_ordered_list(LinkId owner, std::vector<ListEntry> entries) {
  std::sort(entries.begin(), entries.end(), [](const ListEntry& a, const ListEntry& b) {
    return a.level < b.level || (a.level == b.level && a.link < b.link);
  });
  OrderedInterferenceList list;
  list.owner = owner;
  list.entries = std::move(entries);
  const auto owner_count =
      std::count_if(list.entries.begin(), list.entries.end(),
                    [owner](const ListEntry& e) { return e.link == owner; });
  if (owner_count != 1) {
    throw DomainError("owner must appear exactly once in its interference list");
  }
  list.own_index = list.position_of(owner);
  return list;
}

OrderedInterferenceList interference_list(const Network& net, LinkId i,
                                          std::span<const LinkId> cluster) {
  require_link(net, i);
  if (!contains(cluster, i)) {
    throw DomainError("link " + std::to_string(i) + " is not in the cluster");
  }
  std::vector<ListEntry> entries;
  entries.reserve(cluster.size());
  for (LinkId j : cluster) {
    require_link(net, j);
    entries.push_back({j, net.received(i, j)});
  }
  return make_ordered_list(i, std::move(entries));
}

VisibilityGapReport empirical_visibility_gap(const Network& net, int cluster_size) {
  const std::size_t m = net.size();
  if (cluster_size < 1 || static_cast<std::size_t>(cluster_size) > m) {
    throw DomainError("cluster size must lie in [1, M]");
  }
  const std::size_t list_len = std::min<std::size_t>(cluster_size, m - 1);

  // top[i][j] != 0 when j is among the strongest interferers seen by rx_i.
  std::vector<std::vector<std::uint8_t>> top(m, std::vector<std::uint8_t>(m, 0));
  std::vector<LinkId> others;
  for (LinkId i = 0; i < m; ++i) {
    others.clear();
    for (LinkId j = 0; j < m; ++j) {
      if (j != i) others.push_back(j);
    }
    std::partial_sort(others.begin(), others.begin() + static_cast<long>(list_len),
                      others.end(), [&](LinkId a, LinkId b) {
                        const double la = net.received(i, a);
                        const double lb = net.received(i, b);
                        return la > lb || (la == lb && a < b);
                      });
    for (std::size_t k = 0; k < list_len; ++k) top[i][others[k]] = 1;
  }

  VisibilityGapReport report;
  report.per_link.assign(m, 0);
  report.histogram.assign(static_cast<std::size_t>(cluster_size) + 1, 0);
  for (LinkId i = 0; i < m; ++i) {
    int gap = 0;
    for (LinkId j = 0; j < m; ++j) {
      if (top[i][j] && !top[j][i]) ++gap;
    }
    report.per_link[i] = gap;
    ++report.histogram[static_cast<std::size_t>(gap)];
  }
  return report;
}

void write_network_csv(std::ostream& out, const Network& net) {
  if (net.links().size() != net.size()) {
    throw ConfigError("network has no geometry to write");
  }
  out << "id,tx_x,tx_y,rx_x,rx_y,P\n";
  out.precision(17);
  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto& l = net.links()[i];
    out << i << ',' << l.tx.x << ',' << l.tx.y << ',' << l.rx.x << ',' << l.rx.y << ','
        << l.power << '\n';
  }
}

Network read_network_csv(std::istream& in, double path_loss_exponent, double noise) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty network file");
  if (line.rfind("id,tx_x,tx_y,rx_x,rx_y,P", 0) != 0) {
    throw ConfigError("unexpected network CSV header: " + line);
  }
  std::vector<LinkGeometry> links;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    std::size_t id = 0;
    LinkGeometry link;
    if (!(fields >> id >> link.tx.x >> link.tx.y >> link.rx.x >> link.rx.y >> link.power)) {
      throw ConfigError("malformed network CSV row " + std::to_string(row + 1));
    }
    if (id != row) {
      throw ConfigError("network CSV ids must be 0..M-1 in order");
    }
    links.push_back(link);
    ++row;
  }
  if (links.empty()) throw ConfigError("network file has no links");
  return Network::from_geometry(std::move(links), path_loss_exponent, noise);
}

}  // namespace coalition::netsim
