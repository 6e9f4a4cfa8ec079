#include "d2dsim/routing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "d2dsim/errors.hpp"

namespace d2d {

LinkTable compute_link_table(std::span<const RelayNode> nodes, const UrbanMap& map, const ChannelModel& channel,
                             double tx_power_w, std::optional<std::uint64_t> shadow_seed)
{
  const std::size_t n = nodes.size();
  LinkTable table(n);
  std::uint64_t pair = 0;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v, ++pair) {
      const Point a = nodes[u].position, b = nodes[v].position;
      if (a == b) {
        table.set_signal_w(static_cast<int>(u), static_cast<int>(v), tx_power_w);
        continue;
      }
      const Pathloss pl = pathloss_db(a, b, map, channel);
      const double shadow =
          shadow_seed ? channel.shadow_sigma_db * counter_normal(*shadow_seed, pair) : 0.0;
      table.set_signal_w(static_cast<int>(u), static_cast<int>(v),
                         tx_power_w * db_to_linear(shadow - pl.loss_db));
    }
  }
  return table;
}

int binomial_quantile(int trials, double p, double u) noexcept
{
  if (p >= 1.0)
    return trials;
  if (p <= 0.0)
    return 0;
  if (p > 0.5)
    return trials - binomial_quantile(trials, 1.0 - p, 1.0 - u);
  const double odds = p / (1.0 - p);
  const double log_pmf0 = trials * std::log1p(-p);
  int k = 0;
  if (log_pmf0 > -600.0) {
    double pmf = std::exp(log_pmf0);
    double cdf = pmf;
    while (cdf < u && k < trials) {
      pmf *= odds * (trials - k) / (k + 1);
      ++k;
      cdf += pmf;
    }
    return k;
  }
  // Large trial counts: accumulate in log space.
  const double log_u = std::log(u), log_odds = std::log(odds);
  double log_pmf = log_pmf0, log_cdf = log_pmf0;
  while (log_cdf < log_u && k < trials) {
    log_pmf += log_odds + std::log(static_cast<double>(trials - k) / (k + 1));
    ++k;
    const double hi = std::max(log_cdf, log_pmf), lo = std::min(log_cdf, log_pmf);
    log_cdf = hi + std::log1p(std::exp(lo - hi));
  }
  return k;
}

ReachabilityGraph::ReachabilityGraph(std::vector<RelayNode> nodes)
    : nodes_(std::move(nodes)), adjacency_(nodes_.size())
{
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].id != static_cast<int>(i))
      throw DomainError("relay node ids must equal their index");
}

const Edge* ReachabilityGraph::find_edge(int u, int v) const
{
  for (const Edge& e : adjacency_.at(u))
    if (e.to == v)
      return &e;
  return nullptr;
}

void ReachabilityGraph::add_edge(int from, int to, double success)
{
  const int n = static_cast<int>(nodes_.size());
  if (from < 0 || from >= n || to < 0 || to >= n || from == to)
    throw DomainError("edge endpoint does not exist");
  if (!(success >= 0.0 && success <= 1.0))
    throw DomainError("edge success probability outside [0, 1]");
  adjacency_[from].push_back({to, success, distance(nodes_[from].position, nodes_[to].position)});
}

std::size_t ReachabilityGraph::edge_count() const noexcept
{
  std::size_t s = 0;
  for (const auto& a : adjacency_)
    s += a.size();
  return s;
}

ReachabilityGraph build_reachability(std::span<const RelayNode> nodes, const LinkTable& links,
                                     std::span<const double> interference_w, double noise_w,
                                     const ReachabilityParams& params, SeedStream& rng)
{
  if (params.fading_samples < 1)
    throw DomainError("fading_samples must be at least 1");
  if (interference_w.size() != nodes.size() || links.size() != nodes.size())
    throw DomainError("interference field and link table must cover every node");

  ReachabilityGraph graph(std::vector<RelayNode>(nodes.begin(), nodes.end()));
  const int n = static_cast<int>(nodes.size());
  const std::uint64_t seed = derive_seed(rng.seed(), "admit");
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (u == v)
        continue;
      const double s = links.signal_w(u, v);
      if (!(s > 0.0))
        continue;
      // The count of fading draws h with h*S >= zeta*(I + N) is binomial with
      // p = exp(-zeta*(I + N)/S); draw it by inverting the CDF at one uniform
      // per ordered pair.
      const double p = std::exp(-params.threshold * (interference_w[v] + noise_w) / s);
      if (p < 1e-12)
        continue;
      const double u01 = counter_uniform(seed, static_cast<std::uint64_t>(u) * n + v);
      const int hits = binomial_quantile(params.fading_samples, std::min(p, 1.0), u01);
      const double estimate = static_cast<double>(hits) / params.fading_samples;
      if (estimate > 0.0 && estimate >= params.admit_probability)
        graph.add_edge(u, v, estimate);
    }
  }
  return graph;
}

ReachabilityGraph build_reachability(std::span<const RelayNode> nodes, const UrbanMap& map,
                                     const ChannelModel& channel, std::span<const double> interference_w,
                                     const ReachabilityParams& params, SeedStream& rng)
{
  const auto shadow_seed =
      channel.shadow_sigma_db > 0.0 ? std::optional(derive_seed(rng.seed(), "d2d-shadow")) : std::nullopt;
  const LinkTable links = compute_link_table(nodes, map, channel, params.tx_power_w, shadow_seed);
  return build_reachability(nodes, links, interference_w, channel.noise_power_w, params, rng);
}

double route_length(const ReachabilityGraph& graph, std::span<const int> hops)
{
  double len = 0.0;
  for (std::size_t i = 1; i < hops.size(); ++i)
    len += distance(graph.position(hops[i - 1]), graph.position(hops[i]));
  return len;
}

namespace {

void check_endpoints(const ReachabilityGraph& graph, int src, int dst)
{
  const int n = static_cast<int>(graph.size());
  if (src < 0 || src >= n || dst < 0 || dst >= n)
    throw DomainError("route endpoint not in graph");
}

// One greedy leg toward `target`. With `allowed`, next hops are restricted to
// allowed nodes (the target always qualifies); when that leaves no progress,
// the hop is taken unrestricted and counted in `violations`.
std::optional<std::vector<int>> greedy_leg(const ReachabilityGraph& graph, int from, int target,
                                           const std::vector<char>* allowed, int* violations)
{
  std::vector<int> path{from};
  const Point goal = graph.position(target);
  int cur = from;
  while (cur != target) {
    const double here = distance(graph.position(cur), goal);
    int best = -1;
    bool fell_back = false;
    for (int pass = 0; pass < 2 && best < 0; ++pass) {
      const bool restrict = pass == 0 && allowed != nullptr;
      if (pass == 1 && allowed == nullptr)
        break;
      double best_d = here;
      for (const Edge& e : graph.out_edges(cur)) {
        if (restrict && e.to != target && !(*allowed)[e.to])
          continue;
        const double d = distance(graph.position(e.to), goal);
        if (d < best_d - 1e-9 || (best >= 0 && d == best_d && e.to < best)) {
          best_d = d;
          best = e.to;
        }
      }
      fell_back = pass == 1;
    }
    if (best < 0)
      return std::nullopt;
    if (fell_back && violations)
      ++*violations;
    path.push_back(best);
    cur = best;
  }
  return path;
}

Route finish_route(const ReachabilityGraph& graph, std::vector<int> hops)
{
  Route r;
  r.hops = std::move(hops);
  for (std::size_t i = 1; i < r.hops.size(); ++i) {
    const Edge* e = graph.find_edge(r.hops[i - 1], r.hops[i]);
    r.per_hop_success.push_back(e ? e->success : 0.0);
  }
  r.total_length_m = route_length(graph, r.hops);
  return r;
}

} // namespace

std::optional<Route> route_spr(const ReachabilityGraph& graph, int src, int dst)
{
  check_endpoints(graph, src, dst);
  auto leg = greedy_leg(graph, src, dst, nullptr, nullptr);
  if (!leg)
    return std::nullopt;
  return finish_route(graph, std::move(*leg));
}

BoundarySet boundary_nodes(std::span<const RelayNode> nodes, const CellGeometry& cells)
{
  BoundarySet out;
  if (cells.bs_positions.size() < 2) {
    out.diagnostic = "cell boundary undefined with fewer than two base stations";
    return out;
  }
  for (const auto& node : nodes) {
    double d1 = std::numeric_limits<double>::infinity(), d2 = d1;
    for (const Point& bs : cells.bs_positions) {
      const double d = distance(node.position, bs);
      if (d < d1) {
        d2 = d1;
        d1 = d;
      } else if (d < d2) {
        d2 = d;
      }
    }
    if (d2 - d1 <= cells.boundary_tolerance_m)
      out.ids.push_back(node.id);
  }
  std::sort(out.ids.begin(), out.ids.end());
  return out;
}

std::optional<Route> route_iar(const ReachabilityGraph& graph, int src, int dst, const CellGeometry& cells)
{
  return route_iar(graph, src, dst, boundary_nodes(graph.nodes(), cells));
}

std::optional<Route> route_iar(const ReachabilityGraph& graph, int src, int dst, const BoundarySet& boundary)
{
  check_endpoints(graph, src, dst);
  if (src == dst)
    return finish_route(graph, {src});
  if (boundary.ids.empty())
    return std::nullopt;

  std::vector<char> in_band(graph.size(), 0);
  for (int id : boundary.ids)
    in_band.at(id) = 1;

  const auto nearest = [&](int to) {
    const Point p = graph.position(to);
    int best = boundary.ids.front();
    double best_d = distance(graph.position(best), p);
    for (int id : boundary.ids) {
      const double d = distance(graph.position(id), p);
      if (d < best_d) {
        best_d = d;
        best = id;
      }
    }
    return best;
  };
  const int entry = nearest(src);
  const int exit = nearest(dst);

  Route route;
  auto stage1 = greedy_leg(graph, src, entry, nullptr, nullptr);
  if (!stage1)
    return std::nullopt;
  auto stage2 = greedy_leg(graph, entry, exit, &in_band, &route.boundary_violations);
  if (!stage2)
    return std::nullopt;
  auto stage3 = greedy_leg(graph, exit, dst, nullptr, nullptr);
  if (!stage3)
    return std::nullopt;

  // Concatenate, then cut out any loop where a later stage revisits a node.
  std::vector<int> joined = *stage1;
  joined.insert(joined.end(), stage2->begin() + 1, stage2->end());
  joined.insert(joined.end(), stage3->begin() + 1, stage3->end());
  std::vector<int> hops;
  std::vector<int> pos(graph.size(), -1);
  for (int v : joined) {
    if (pos[v] >= 0) {
      for (std::size_t k = pos[v] + 1; k < hops.size(); ++k)
        pos[hops[k]] = -1;
      hops.resize(pos[v] + 1);
      continue;
    }
    pos[v] = static_cast<int>(hops.size());
    hops.push_back(v);
  }

  const int violations = route.boundary_violations;
  route = finish_route(graph, std::move(hops));
  route.boundary_violations = violations;
  route.stages = {std::move(*stage1), std::move(*stage2), std::move(*stage3)};
  return route;
}

BroadcastOutcome route_br(const ReachabilityGraph& graph, int src, int dst)
{
  check_endpoints(graph, src, dst);
  BroadcastOutcome out;
  const int n = static_cast<int>(graph.size());
  std::vector<int> depth(n, -1), parent(n, -1);
  depth[src] = 0;
  std::vector<int> frontier{src};
  while (!frontier.empty()) {
    out.waves.push_back(frontier);
    out.transmissions += static_cast<int>(frontier.size());
    std::vector<int> next;
    for (int u : frontier) {
      for (const Edge& e : graph.out_edges(u)) {
        if (depth[e.to] >= 0)
          continue;
        depth[e.to] = depth[u] + 1;
        parent[e.to] = u;
        next.push_back(e.to);
      }
    }
    frontier = std::move(next);
  }
  out.reached = depth[dst] >= 0;
  out.hop_depth = depth[dst];
  if (out.reached) {
    for (int v = dst; v >= 0; v = parent[v])
      out.path.push_back(v);
    std::reverse(out.path.begin(), out.path.end());
  }
  return out;
}

} // namespace d2d
