#include "d2dsim/validate.hpp"

#include <cmath>
#include <cstdio>
#include <queue>
#include <sstream>

#include "d2dsim/analytics.hpp"
#include "d2dsim/rng.hpp"
#include "d2dsim/routing.hpp"
#include "d2dsim/sim.hpp"

namespace d2d {

namespace {

Check make_check(std::string suite, std::string name, double gap, double tol)
{
  return {std::move(suite), std::move(name), gap, tol, gap < tol};
}

std::string num(double v, const char* f = "%.6g")
{
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void a_function_suite(std::vector<Check>& out)
{
  for (double zeta : {0.01, 0.1, 0.2512, 1.0, 3.0, 10.0, 100.0}) {
    const double closed = std::sqrt(zeta) * std::atan(std::sqrt(zeta));
    const double quad = analytics::a_function_quadrature(zeta, 4.0);
    out.push_back(make_check("a_function", "zeta=" + num(zeta), std::abs(quad - closed), 1e-9));
  }
}

void ppp_suite(std::vector<Check>& out, const ValidateOptions& o)
{
  std::uint64_t idx = 0;
  for (double lam : {1.0, 3.0, 5.0})
    for (double r : {100.0, 200.0, 300.0}) {
      analytics::SgParams p;
      p.bs_density_per_m2 = lam * 1e-6;
      const auto res = analytics::validate_cc_closed_form(p, r, o.ppp_trials, derive_seed(o.seed, "ppp", idx++));
      out.push_back(make_check("closed_form_ppp", "density=" + num(lam) + "/km2,r=" + num(r) + "m",
                               res.abs_gap, 0.01));
    }
}

void route_outage_suite(std::vector<Check>& out, const ValidateOptions& o)
{
  SeedStream rng(o.seed, "route-outage");
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const int j = 1 + static_cast<int>(rng.uniform() * 10.0) % 10;
    std::vector<double> q(j);
    for (double& x : q)
      x = rng.uniform();
    // Sum the probability of every hop-outcome pattern except all-success.
    double failed = 0.0;
    for (unsigned mask = 0; mask < (1u << j); ++mask) {
      double p = 1.0;
      for (int h = 0; h < j; ++h)
        p *= (mask >> h & 1u) ? 1.0 - q[h] : q[h];
      if (mask != (1u << j) - 1)
        failed += p;
    }
    worst = std::max(worst, std::abs(failed - analytics::d2d_route_outage(q)));
  }
  out.push_back(make_check("route_outage", "50 profiles vs enumeration", worst, 1e-12));
}

void broadcast_suite(std::vector<Check>& out, const ValidateOptions& o)
{
  SeedStream rng(o.seed, "broadcast-bfs");
  int mismatches = 0;
  for (int g = 0; g < 200; ++g) {
    const int n = 2 + static_cast<int>(rng.uniform() * 40.0);
    const double density = rng.uniform(0.01, 0.3);
    std::vector<RelayNode> nodes;
    for (int i = 0; i < n; ++i)
      nodes.push_back({i, {rng.uniform(0.0, 100.0), rng.uniform(0.0, 100.0)}, NodeRole::relay});
    ReachabilityGraph graph(nodes);
    std::vector<std::vector<int>> adj(n);
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v)
        if (u != v && rng.uniform() < density) {
          graph.add_edge(u, v, 1.0);
          adj[u].push_back(v);
        }
    const int src = 0, dst = n - 1;
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    q.push(src);
    seen[src] = 1;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : adj[u])
        if (!seen[v]) {
          seen[v] = 1;
          q.push(v);
        }
    }
    if (route_br(graph, src, dst).reached != static_cast<bool>(seen[dst]))
      ++mismatches;
  }
  out.push_back(make_check("broadcast_bfs", "200 random graphs", mismatches, 0.5));
}

void layout_suite(std::vector<Check>& out, const ValidateOptions& o)
{
  Scenario sc;
  sc.manhattan.building_fill_ratio = 0.0;
  sc.manhattan.min_one_building = false;
  sc.bs.kind = BsLayoutKind::ppp;
  sc.bs.ppp_density_per_km2 = 5.0;
  sc.bs.probe_distance_m = 100.0;
  sc.bs.ppp_radius_m = 3000.0;
  sc.channel.law = PathlossLaw::power_law;
  sc.channel.shadow_sigma_db = 0.0;
  sc.channel.noise_power_w = 0.0;
  sc.d2d_density_per_km2 = 0.0;
  sc.pair_distance = 0.1;
  sc.master_seed = derive_seed(o.seed, "layout");
  const UrbanMap map = build_map(sc);

  double outage = 0.0;
  for (int t = 0; t < o.layout_draws; ++t) {
    const Deployment dep = deploy(sc, map, t);
    outage += cc_baseline(dep, sc, map, 10, derive_seed(dep.trial_seed, "validate"));
  }
  outage /= o.layout_draws;
  analytics::SgParams p;
  p.bs_density_per_m2 = sc.bs.ppp_density_per_km2 * 1e-6;
  const double analytic = 1.0 - analytics::cc_link_success(p, sc.bs.probe_distance_m);
  out.push_back(make_check("layout_ppp", "simulated PPP layout vs closed form", std::abs(outage - analytic), 0.03));
}

} // namespace

std::vector<Check> run_validation(const ValidateOptions& options)
{
  std::vector<Check> out;
  a_function_suite(out);
  ppp_suite(out, options);
  route_outage_suite(out, options);
  broadcast_suite(out, options);
  layout_suite(out, options);
  return out;
}

std::string checks_csv(const std::vector<Check>& checks)
{
  std::ostringstream out;
  out << "suite,name,gap,tolerance,status\n";
  for (const auto& c : checks)
    out << c.suite << ",\"" << c.name << "\"," << num(c.gap, "%.3e") << "," << num(c.tolerance, "%.3e") << ","
        << (c.passed ? "pass" : "FAIL") << "\n";
  return out.str();
}

std::string analyze_csv(const AnalyzeOptions& o)
{
  std::ostringstream out;
  out << "density_per_km2,r_m,threshold_db,a_function,analytic_success,empirical_success,abs_gap,trials\n";
  const double zeta = std::pow(10.0, o.threshold_db / 10.0);
  const double a = analytics::a_function(zeta, 4.0);
  std::uint64_t idx = 0;
  for (double lam : o.densities_per_km2)
    for (double r : o.distances_m) {
      analytics::SgParams p;
      p.bs_density_per_m2 = lam * 1e-6;
      p.threshold = zeta;
      const auto res = analytics::validate_cc_closed_form(p, r, o.trials, derive_seed(o.seed, "analyze", idx++));
      out << num(lam) << "," << num(r) << "," << num(o.threshold_db) << "," << num(a, "%.9f") << ","
          << num(res.analytic, "%.6f") << "," << num(res.empirical, "%.6f") << "," << num(res.abs_gap, "%.6f")
          << "," << res.trials << "\n";
    }
  return out.str();
}

} // namespace d2d
