#include <cmath>
#include <functional>
#include <queue>
#include <set>
#include <vector>

#include <doctest.h>

#include "d2dsim/errors.hpp"
#include "d2dsim/routing.hpp"

using namespace d2d;

namespace {

std::vector<RelayNode> nodes_at(const std::vector<Point>& pts)
{
  std::vector<RelayNode> out;
  for (std::size_t i = 0; i < pts.size(); ++i)
    out.push_back({static_cast<int>(i), pts[i], NodeRole::relay});
  return out;
}

// Unit-disk graph: u->v for every pair within `reach`.
ReachabilityGraph disk_graph(const std::vector<Point>& pts, double reach)
{
  ReachabilityGraph g(nodes_at(pts));
  for (std::size_t u = 0; u < pts.size(); ++u)
    for (std::size_t v = 0; v < pts.size(); ++v)
      if (u != v && distance(pts[u], pts[v]) <= reach)
        g.add_edge(static_cast<int>(u), static_cast<int>(v), 1.0);
  return g;
}

ReachabilityGraph random_graph(SeedStream& rng, int n, double p)
{
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i)
    pts.push_back({rng.uniform(0, 1000), rng.uniform(0, 1000)});
  ReachabilityGraph g(nodes_at(pts));
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (u != v && rng.uniform() < p)
        g.add_edge(u, v, rng.uniform());
  return g;
}

std::vector<int> bfs_depth(const ReachabilityGraph& g, int src)
{
  std::vector<int> depth(g.size(), -1);
  std::queue<int> q;
  depth[src] = 0;
  q.push(src);
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (const Edge& e : g.out_edges(u))
      if (depth[e.to] < 0) {
        depth[e.to] = depth[u] + 1;
        q.push(e.to);
      }
  }
  return depth;
}

void check_route_invariants(const ReachabilityGraph& g, const Route& r)
{
  std::set<int> seen(r.hops.begin(), r.hops.end());
  CHECK(seen.size() == r.hops.size());
  double len = 0.0;
  for (std::size_t i = 1; i < r.hops.size(); ++i) {
    CHECK(g.find_edge(r.hops[i - 1], r.hops[i]) != nullptr);
    len += distance(g.position(r.hops[i - 1]), g.position(r.hops[i]));
  }
  CHECK(r.total_length_m == doctest::Approx(len));
  CHECK(r.per_hop_success.size() == static_cast<std::size_t>(r.hop_count()));
}

} // namespace

TEST_CASE("SPR trivial cases")
{
  const ReachabilityGraph g = disk_graph({{0, 0}, {100, 0}, {900, 0}}, 150);
  const auto same = route_spr(g, 1, 1);
  REQUIRE(same);
  CHECK(same->hop_count() == 0);
  CHECK(same->total_length_m == 0.0);
  CHECK_FALSE(route_spr(g, 2, 0));
  CHECK_THROWS_AS(route_spr(g, 0, 7), DomainError);
}

TEST_CASE("SPR on a colinear chain matches exhaustive greedy search")
{
  std::vector<Point> pts;
  for (int i = 0; i <= 5; ++i)
    pts.push_back({100.0 * i, 0.0});
  const ReachabilityGraph g = disk_graph(pts, 150);
  const auto r = route_spr(g, 0, 5);
  REQUIRE(r);
  CHECK(r->hop_count() == 5);
  CHECK(r->hops == std::vector<int>{0, 1, 2, 3, 4, 5});

  // Every strictly-progressing path from 0 to 5; the greedy one picks the
  // closest-to-destination neighbour at every step.
  std::vector<std::vector<int>> greedy;
  const Point goal = pts[5];
  std::function<void(std::vector<int>&)> walk = [&](std::vector<int>& path) {
    const int u = path.back();
    if (u == 5) {
      bool is_greedy = true;
      for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        double best = distance(pts[path[k]], goal);
        for (const Edge& e : g.out_edges(path[k]))
          best = std::min(best, distance(pts[e.to], goal));
        is_greedy = is_greedy && distance(pts[path[k + 1]], goal) == best;
      }
      if (is_greedy)
        greedy.push_back(path);
      return;
    }
    for (const Edge& e : g.out_edges(u))
      if (distance(pts[e.to], goal) < distance(pts[u], goal)) {
        path.push_back(e.to);
        walk(path);
        path.pop_back();
      }
  };
  std::vector<int> start{0};
  walk(start);
  REQUIRE(greedy.size() == 1);
  CHECK(greedy[0] == r->hops);
}

TEST_CASE("SPR routes are acyclic with strictly shrinking remaining distance")
{
  SeedStream rng(8);
  int found = 0;
  for (int t = 0; t < 100; ++t) {
    std::vector<Point> pts;
    for (int i = 0; i < 60; ++i)
      pts.push_back({rng.uniform(0, 800), rng.uniform(0, 800)});
    const ReachabilityGraph g = disk_graph(pts, 180);
    const auto r = route_spr(g, 0, 1);
    if (!r)
      continue;
    ++found;
    check_route_invariants(g, *r);
    for (std::size_t k = 1; k < r->hops.size(); ++k)
      CHECK(distance(pts[r->hops[k]], pts[1]) < distance(pts[r->hops[k - 1]], pts[1]));
    if (bfs_depth(g, 0)[1] < 0)
      FAIL("SPR found a route to an unreachable node");
  }
  CHECK(found > 20);
}

TEST_CASE("boundary band")
{
  CellGeometry cells{{{0, 0}, {500, 0}}, 20.0};
  const auto nodes = nodes_at({{250, 0}, {0, 1}, {255, 100}, {280, 0}});
  const BoundarySet b = boundary_nodes(nodes, cells);
  CHECK(b.ids == std::vector<int>{0, 2});

  CellGeometry wide = cells;
  wide.boundary_tolerance_m = 80.0;
  const BoundarySet w = boundary_nodes(nodes, wide);
  for (int id : b.ids)
    CHECK(std::find(w.ids.begin(), w.ids.end(), id) != w.ids.end());
  CHECK(w.ids.size() == 3);

  CellGeometry single{{{0, 0}}, 20.0};
  const BoundarySet s = boundary_nodes(nodes, single);
  CHECK(s.ids.empty());
  CHECK_FALSE(s.diagnostic.empty());
}

TEST_CASE("IAR on the boundary degenerates to constrained SPR")
{
  // Both endpoints sit on the bisector x = 250.
  std::vector<Point> pts{{250, 0}, {250, 500}};
  for (int i = 1; i < 5; ++i)
    pts.push_back({250, 100.0 * i});
  const ReachabilityGraph g = disk_graph(pts, 150);
  const CellGeometry cells{{{0, 250}, {500, 250}}, 10.0};
  const auto r = route_iar(g, 0, 1, cells);
  REQUIRE(r);
  REQUIRE(r->stages.size() == 3);
  CHECK(r->stages[0].size() == 1);
  CHECK(r->stages[2].size() == 1);
  CHECK(r->hops == std::vector<int>{0, 2, 3, 4, 5, 1});
  CHECK(r->boundary_violations == 0);
}

TEST_CASE("IAR detours through the band and joins stages")
{
  // Two cells split at x = 250; the straight line between src and dst runs
  // through the left site, the band is the column at x = 250.
  std::vector<Point> pts{{100, 250}, {100, 650}};
  for (int k = 0; k <= 8; ++k)
    pts.push_back({250, 100.0 * k + 50});
  for (int k = 1; k <= 4; ++k)
    pts.push_back({100.0 + 30.0 * k, 250.0 + 0.0 * k});
  const ReachabilityGraph g = disk_graph(pts, 160);
  const CellGeometry cells{{{0, 450}, {500, 450}}, 15.0};
  const auto iar = route_iar(g, 0, 1, cells);
  REQUIRE(iar);
  check_route_invariants(g, *iar);
  for (std::size_t s = 0; s + 1 < iar->stages.size(); ++s)
    CHECK(iar->stages[s].back() == iar->stages[s + 1].front());
  CHECK(iar->hops.front() == 0);
  CHECK(iar->hops.back() == 1);
  for (int v : iar->stages[1])
    CHECK(std::abs(pts[v].x - 250.0) < 1e-9);
}

TEST_CASE("IAR stage two falls back and counts violations")
{
  // The band holds the entry and exit only; no band relay in between.
  std::vector<Point> pts{{240, 0}, {240, 600}, {250, 0}, {250, 600}, {300, 150}, {300, 300}, {300, 450}};
  const ReachabilityGraph g = disk_graph(pts, 170);
  const CellGeometry cells{{{0, 300}, {500, 300}}, 25.0};
  const auto r = route_iar(g, 0, 1, cells);
  REQUIRE(r);
  CHECK(r->boundary_violations >= 1);
  check_route_invariants(g, *r);
}

TEST_CASE("IAR properties on random graphs")
{
  SeedStream rng(77);
  const CellGeometry cells{{{200, 400}, {600, 400}, {400, 746}}, 40.0};
  int both = 0;
  for (int t = 0; t < 150; ++t) {
    std::vector<Point> pts;
    for (int i = 0; i < 80; ++i)
      pts.push_back({rng.uniform(0, 800), rng.uniform(0, 800)});
    const ReachabilityGraph g = disk_graph(pts, 170);
    const auto iar = route_iar(g, 0, 1, cells);
    if (!iar)
      continue;
    check_route_invariants(g, *iar);
    REQUIRE(iar->stages.size() == 3);
    CHECK(iar->stages[0].back() == iar->stages[1].front());
    CHECK(iar->stages[1].back() == iar->stages[2].front());
    both += route_spr(g, 0, 1).has_value();
  }
  CHECK(both > 10);
}

TEST_CASE("BR trivial cases")
{
  const ReachabilityGraph g = disk_graph({{0, 0}, {100, 0}, {200, 0}, {900, 0}, {1000, 0}}, 150);
  const BroadcastOutcome adj = route_br(g, 0, 1);
  CHECK(adj.reached);
  CHECK(adj.hop_depth == 1);
  CHECK(adj.path == std::vector<int>{0, 1});
  const BroadcastOutcome cut = route_br(g, 0, 4);
  CHECK_FALSE(cut.reached);
  CHECK(cut.transmissions == 3);
  CHECK(cut.hop_depth == -1);
}

TEST_CASE("BR agrees with an independent BFS")
{
  SeedStream rng(31337);
  for (int t = 0; t < 200; ++t) {
    const int n = 2 + static_cast<int>(rng.uniform(0, 40));
    const ReachabilityGraph g = random_graph(rng, n, rng.uniform(0.0, 0.15));
    const int src = static_cast<int>(rng.uniform(0, n)), dst = static_cast<int>(rng.uniform(0, n));
    const auto depth = bfs_depth(g, src);
    const BroadcastOutcome b = route_br(g, src, dst);
    CHECK(b.reached == (depth[dst] >= 0));
    CHECK(b.hop_depth == depth[dst]);
    int component = 0;
    for (int d : depth)
      component += d >= 0;
    CHECK(b.transmissions == component);
    CHECK(b.transmissions <= n);
    if (b.reached) {
      CHECK(static_cast<int>(b.path.size()) == depth[dst] + 1);
      for (std::size_t k = 1; k < b.path.size(); ++k)
        CHECK(g.find_edge(b.path[k - 1], b.path[k]) != nullptr);
    }
  }
}

TEST_CASE("graph rejects bad edges")
{
  ReachabilityGraph g(nodes_at({{0, 0}, {1, 0}}));
  CHECK_THROWS_AS(g.add_edge(0, 2, 0.5), DomainError);
  CHECK_THROWS_AS(g.add_edge(0, 1, 1.5), DomainError);
  CHECK_THROWS_AS(g.add_edge(0, 0, 0.5), DomainError);
  CHECK_THROWS_AS(ReachabilityGraph(std::vector<RelayNode>{{3, {0, 0}, NodeRole::relay}}), DomainError);
}

TEST_CASE("binomial quantile")
{
  for (int n : {1, 8, 64})
    for (double p : {0.0, 0.1, 0.5, 0.73, 1.0}) {
      CHECK(binomial_quantile(n, p, 1e-300) >= 0);
      CHECK(binomial_quantile(n, p, 1.0 - 1e-16) <= n);
    }
  CHECK(binomial_quantile(10, 1.0, 0.3) == 10);
  CHECK(binomial_quantile(10, 0.0, 0.3) == 0);
  SeedStream rng(4);
  const int draws = 200000;
  double sum = 0.0;
  for (int i = 0; i < draws; ++i)
    sum += binomial_quantile(64, 0.37, rng.uniform());
  CHECK(sum / draws == doctest::Approx(64 * 0.37).epsilon(0.005));
  for (double u = 0.01; u < 1.0; u += 0.01) {
    int prev = 0;
    for (double p = 0.0; p <= 1.0; p += 0.01) {
      const int k = binomial_quantile(64, p, u);
      CHECK(k >= prev);
      prev = k;
    }
  }
}

TEST_CASE("admission")
{
  const auto nodes = nodes_at({{0, 0}, {1, 0}});
  const UrbanMap open = UrbanMap::create({10, 10}, {}, 10.0);
  ChannelModel ch = ChannelModel::defaults();
  ch.shadow_sigma_db = 0.0;
  ch.noise_power_w = noise_power_w(-162, 20e6);
  ReachabilityParams params;
  SeedStream rng(5);
  const std::vector<double> quiet(2, 0.0);
  const ReachabilityGraph g = build_reachability(nodes, open, ch, quiet, params, rng);
  REQUIRE(g.find_edge(0, 1));
  CHECK(g.find_edge(0, 1)->success == doctest::Approx(1.0));

  const std::vector<double> loud(2, 1.0);
  CHECK(build_reachability(nodes, open, ch, loud, params, rng).edge_count() == 0);
}

TEST_CASE("admission estimate matches the Rayleigh closed form")
{
  const auto nodes = nodes_at({{0, 0}, {50, 0}});
  LinkTable t(2);
  t.set_signal_w(0, 1, 1e-9);
  const std::vector<double> interf{2e-9, 2e-9};
  ReachabilityParams params;
  params.admit_probability = 0.0;
  params.fading_samples = 4096;
  params.threshold = 0.251188643150958;
  const double p = std::exp(-params.threshold * (2e-9 + 1e-10) / 1e-9);
  const double se = std::sqrt(p * (1 - p) / params.fading_samples);
  const int seeds = 1000;
  int within = 0;
  double sum = 0.0;
  for (int s = 1; s <= seeds; ++s) {
    SeedStream rng(static_cast<std::uint64_t>(s));
    const ReachabilityGraph g = build_reachability(nodes, t, interf, 1e-10, params, rng);
    REQUIRE(g.find_edge(0, 1));
    const double est = g.find_edge(0, 1)->success;
    within += std::abs(est - p) <= 3 * se;
    sum += est;
  }
  CHECK(within >= 0.99 * seeds);
  CHECK(std::abs(sum / seeds - p) < 3 * se / std::sqrt(double(seeds)));
}

TEST_CASE("raising the threshold never adds edges")
{
  SeedStream pos(12);
  std::vector<Point> pts;
  for (int i = 0; i < 40; ++i)
    pts.push_back({pos.uniform(0, 400), pos.uniform(0, 400)});
  const auto nodes = nodes_at(pts);
  const UrbanMap open = UrbanMap::create({400, 400}, {}, 10.0);
  ChannelModel ch = ChannelModel::defaults();
  ch.noise_power_w = noise_power_w(-162, 20e6);
  std::vector<double> interf(nodes.size());
  for (double& w : interf)
    w = pos.uniform(1e-13, 1e-10);
  ReachabilityParams params;
  std::set<std::pair<int, int>> prev;
  bool first = true;
  for (double db = -12.0; db <= 12.0; db += 2.0) {
    params.threshold = std::pow(10.0, db / 10.0);
    SeedStream rng(99);
    const ReachabilityGraph g = build_reachability(nodes, open, ch, interf, params, rng);
    std::set<std::pair<int, int>> cur;
    for (int u = 0; u < static_cast<int>(g.size()); ++u)
      for (const Edge& e : g.out_edges(u))
        cur.insert({u, e.to});
    if (!first)
      for (const auto& e : cur)
        CHECK(prev.count(e) == 1);
    prev = std::move(cur);
    first = false;
  }
}

TEST_CASE("link table is reciprocal and seed-deterministic")
{
  SeedStream pos(3);
  std::vector<Point> pts;
  for (int i = 0; i < 20; ++i)
    pts.push_back({pos.uniform(0, 300), pos.uniform(0, 300)});
  const auto nodes = nodes_at(pts);
  const UrbanMap m = UrbanMap::create({300, 300}, {Building{{{100, 100}, {200, 100}, {200, 200}, {100, 200}}, 10, {}}},
                                      10.0);
  const ChannelModel ch = ChannelModel::defaults();
  const LinkTable a = compute_link_table(nodes, m, ch, 0.1, 17);
  const LinkTable b = compute_link_table(nodes, m, ch, 0.1, 17);
  for (int u = 0; u < 20; ++u)
    for (int v = 0; v < 20; ++v) {
      CHECK(a.signal_w(u, v) == a.signal_w(v, u));
      CHECK(a.signal_w(u, v) == b.signal_w(u, v));
    }
  const LinkTable flat = compute_link_table(nodes, m, ch, 0.1, std::nullopt);
  CHECK(flat.signal_w(0, 1) ==
        doctest::Approx(0.1 * db_to_linear(-pathloss_db(pts[0], pts[1], m, ch).loss_db)));
}
