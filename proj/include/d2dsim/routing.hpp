#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "d2dsim/channel.hpp"
#include "d2dsim/env.hpp"
#include "d2dsim/rng.hpp"

namespace d2d {

enum class NodeRole { source, relay, destination };

/// Node ids are dense: node i has id i.
struct RelayNode {
  int id = 0;
  Point position;
  NodeRole role = NodeRole::relay;
};

/// Mean received D2D power for every ordered node pair (shadowing included,
/// fading excluded). Symmetric; zero on the diagonal.
class LinkTable {
public:
  LinkTable() = default;
  explicit LinkTable(std::size_t n) : n_(n), signal_w_(n * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  double signal_w(int from, int to) const noexcept { return signal_w_[from * n_ + to]; }
  void set_signal_w(int a, int b, double w) noexcept
  {
    signal_w_[a * n_ + b] = w;
    signal_w_[b * n_ + a] = w;
  }

private:
  std::size_t n_ = 0;
  std::vector<double> signal_w_;
};

/// Pairwise D2D link budget at `tx_power_w`. Shadowing for the unordered pair
/// {u, v} is counter_normal(shadow_seed, pair index) * sigma, so it is
/// reciprocal and independent of evaluation order. shadow_seed = nullopt
/// disables shadowing.
LinkTable compute_link_table(std::span<const RelayNode> nodes, const UrbanMap& map, const ChannelModel& channel,
                             double tx_power_w, std::optional<std::uint64_t> shadow_seed);

struct Edge {
  int to = 0;
  double success = 0.0;
  double distance_m = 0.0;
};

struct ReachabilityParams {
  double tx_power_w = 0.1;
  double threshold = 0.251188643150958; // linear SINR threshold
  /// Links are admitted when estimated P(SINR > threshold) >= admit_probability.
  double admit_probability = 0.5;
  int fading_samples = 64;
};

class ReachabilityGraph {
public:
  ReachabilityGraph() = default;
  explicit ReachabilityGraph(std::vector<RelayNode> nodes);

  const std::vector<RelayNode>& nodes() const noexcept { return nodes_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<Edge>& out_edges(int u) const { return adjacency_.at(u); }
  const Edge* find_edge(int u, int v) const;
  Point position(int u) const { return nodes_.at(u).position; }

  /// Throws DomainError on an unknown endpoint or a probability outside [0, 1].
  void add_edge(int from, int to, double success);
  std::size_t edge_count() const noexcept;

private:
  std::vector<RelayNode> nodes_;
  std::vector<std::vector<Edge>> adjacency_;
};

/// Smallest k with P(Binomial(trials, p) <= k) >= u; nondecreasing in p and u.
int binomial_quantile(int trials, double p, double u) noexcept;

/// Edge u->v exists iff its estimated success probability (fading_samples
/// Rayleigh draws against interference_w[v] + noise) reaches the admission
/// probability. The estimate for u->v depends only on rng.seed() and (u, v).
ReachabilityGraph build_reachability(std::span<const RelayNode> nodes, const LinkTable& links,
                                     std::span<const double> interference_w, double noise_w,
                                     const ReachabilityParams& params, SeedStream& rng);

/// Convenience form that evaluates the link budget from the map and channel.
ReachabilityGraph build_reachability(std::span<const RelayNode> nodes, const UrbanMap& map,
                                     const ChannelModel& channel, std::span<const double> interference_w,
                                     const ReachabilityParams& params, SeedStream& rng);

struct Route {
  std::vector<int> hops; // node ids, source first
  std::vector<double> per_hop_success;
  double total_length_m = 0.0;
  /// IAR only: the three stage legs before concatenation.
  std::vector<std::vector<int>> stages;
  /// IAR only: stage-2 hops that had to leave the boundary band.
  int boundary_violations = 0;

  int hop_count() const noexcept { return hops.empty() ? 0 : static_cast<int>(hops.size()) - 1; }
};

/// Greedy geographic routing: always move to the admitted neighbour closest to
/// the destination; nullopt when no neighbour strictly reduces that distance.
std::optional<Route> route_spr(const ReachabilityGraph& graph, int src, int dst);

struct CellGeometry {
  std::vector<Point> bs_positions;
  double boundary_tolerance_m = 50.0;
};

struct BoundarySet {
  std::vector<int> ids; // ascending
  std::string diagnostic;
};

/// Nodes whose distances to their two nearest BSs differ by at most the tolerance.
BoundarySet boundary_nodes(std::span<const RelayNode> nodes, const CellGeometry& cells);

/// Three greedy legs: source to its nearest boundary node, along the boundary
/// band to the boundary node nearest the destination, then to the destination.
std::optional<Route> route_iar(const ReachabilityGraph& graph, int src, int dst, const CellGeometry& cells);
std::optional<Route> route_iar(const ReachabilityGraph& graph, int src, int dst, const BoundarySet& boundary);

struct BroadcastOutcome {
  bool reached = false;
  int transmissions = 0;
  int hop_depth = -1;
  /// Nodes rebroadcasting in each flooding round; round 0 is the source.
  std::vector<std::vector<int>> waves;
  /// Flooding-tree path from src to dst when reached.
  std::vector<int> path;
};

/// Flooding: each node that receives rebroadcasts exactly once.
BroadcastOutcome route_br(const ReachabilityGraph& graph, int src, int dst);

double route_length(const ReachabilityGraph& graph, std::span<const int> hops);

} // namespace d2d
