#include <algorithm>
#include <cmath>
#include <numeric>

#include "d2dsim/errors.hpp"
#include "d2dsim/sim.hpp"
#include "sim_internal.hpp"

namespace d2d {

namespace {

enum class End { ue, bs };

/// Mean received power over a link (fading excluded). Distances under 1 m are
/// evaluated at 1 m.
/// `los_u` is a uniform draw deciding the LOS state under the LOS-probability
/// model; other models ignore it.
double mean_rx_w(Point tx, Point rx, double power_w, End end, double shadow_db, double los_u, const UrbanMap& map,
                 const Scenario& sc)
{
  const double d = std::max(distance(tx, rx), 1.0);
  if (end == End::bs && sc.bs_link_model == BsLinkModel::nlos)
    return power_w * db_to_linear(shadow_db - distance_loss_db(d, false, sc.channel));
  if (end == End::bs && sc.bs_link_model == BsLinkModel::los_probability) {
    const bool los = los_u < umi_los_probability(d);
    return power_w * db_to_linear(shadow_db - distance_loss_db(d, los, sc.channel));
  }
  const CrossingSummary walls = crossing_summary(tx, rx, map);
  const bool penetrate = end == End::ue || sc.bs_links_penetrate;
  const double loss = distance_loss_db(d, walls.count == 0, sc.channel) + (penetrate ? walls.loss_db : 0.0);
  return power_w * db_to_linear(shadow_db - loss);
}

struct Probe {
  double signal_w = 0.0;
  std::vector<double> interferers_w;
};

/// Everything about one deployment and band that the strategies share.
class BandContext {
public:
  BandContext(const Deployment& dep, const Scenario& sc, const UrbanMap& map, Band band, const LinkTable& links)
      : dep_(dep), sc_(sc), map_(map), band_(band), links_(links)
  {
    const std::size_t n = dep.d2d.size();
    const double sigma = sc.channel.shadow_sigma_db;
    const std::uint64_t shadow_seed = derive_seed(dep.trial_seed, "ambient-shadow", band_index());
    const std::uint64_t los_seed = derive_seed(dep.trial_seed, "ambient-los", band_index());

    // Ambient interference at every D2D receiver.
    const auto& sources = band == Band::dl ? dep.bs : dep.cc_ues;
    const double power = band == Band::dl ? sc.bs_power_w : sc.cc_ue_power_w;
    const End end = band == Band::dl ? End::bs : End::ue;
    ambient_.assign(n, {});
    field_.assign(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
      ambient_[v].reserve(sources.size());
      for (std::size_t i = 0; i < sources.size(); ++i) {
        const double shadow = sigma * counter_normal(shadow_seed, i * n + v);
        const double w = mean_rx_w(sources[i], dep.d2d[v].position, power, end, shadow,
                                   counter_uniform(los_seed, i * n + v), map, sc);
        ambient_[v].push_back(w);
        field_[v] += w;
      }
    }

    ReachabilityParams params;
    params.tx_power_w = sc.d2d_power_w;
    params.threshold = sc.threshold_linear();
    params.admit_probability = sc.admit_probability;
    params.fading_samples = sc.fading_samples;
    SeedStream admit(dep.trial_seed, "admission", band_index());
    graph_ = build_reachability(dep.d2d, links, field_, sc.channel.noise_power_w, params, admit);

    build_probes();
  }

  const ReachabilityGraph& graph() const noexcept { return graph_; }
  const std::vector<double>& ambient(int v) const { return ambient_[v]; }
  std::uint64_t band_index() const noexcept { return band_ == Band::dl ? 0 : 1; }

  /// Probe outage averaged over probes, with `active` D2D nodes transmitting
  /// together (empty: baseline).
  double probe_outage(const std::vector<int>& active) const
  {
    const double zeta = sc_.threshold_linear();
    const double noise = sc_.channel.noise_power_w;
    double sum = 0.0;
    std::vector<double> interferers;
    for (std::size_t p = 0; p < probes_.size(); ++p) {
      interferers = probes_[p].interferers_w;
      for (int node : active)
        interferers.push_back(d2d_to_victim(node, p));
      sum += 1.0 - rayleigh_success(probes_[p].signal_w, interferers, noise, zeta);
    }
    return sum / static_cast<double>(probes_.size());
  }

  /// Mean probe outage over transmission slots; no slots means baseline.
  double slot_average(const std::vector<std::vector<int>>& slots) const
  {
    if (slots.empty())
      return baseline();
    double s = 0.0;
    for (const auto& slot : slots)
      s += probe_outage(slot);
    return s / static_cast<double>(slots.size());
  }

  double baseline() const { return baseline_; }

  /// One explicit Rayleigh draw of the hop u->v against the ambient field.
  bool draw_hop(int u, int v, SeedStream& rng) const
  {
    const double zeta = sc_.threshold_linear();
    double interference = sc_.channel.noise_power_w;
    for (double w : ambient_[v])
      interference += draw_fading(rng) * w;
    return draw_fading(rng) * links_.signal_w(u, v) >= zeta * interference;
  }

  /// Exact per-link success of u->v (every gain Rayleigh).
  double link_success(int u, int v) const
  {
    return rayleigh_success(links_.signal_w(u, v), ambient_[v], sc_.channel.noise_power_w,
                            sc_.threshold_linear());
  }

private:
  void build_probes()
  {
    const std::size_t count = static_cast<std::size_t>(sc_.cc_probes_per_trial);
    SeedStream rng(dep_.trial_seed, "probes", band_index());
    const std::uint64_t shadow_seed = derive_seed(dep_.trial_seed, "probe-shadow", band_index());
    const double sigma = sc_.channel.shadow_sigma_db;
    const double cell_radius = sc_.bs.isd_m / std::sqrt(3.0);
    const std::size_t nb = dep_.bs.size();
    const int serving = dep_.serving_bs;
    const std::uint64_t los_seed = derive_seed(dep_.trial_seed, "probe-los", band_index());
    std::uint64_t draw = 0, los_draw = 0;
    const auto shadow = [&]() { return sigma * counter_normal(shadow_seed, draw++); };
    const auto los = [&]() { return counter_uniform(los_seed, los_draw++); };

    probes_.resize(count);
    probe_points_.resize(count);
    for (std::size_t p = 0; p < count; ++p) {
      const Point ue = sc_.bs.kind == BsLayoutKind::ppp
                           ? map_.bounds().center()
                           : detail::sample_in_cell(dep_, serving, cell_radius, map_, false, rng);
      probe_points_[p] = ue;
      Probe& pr = probes_[p];
      if (band_ == Band::dl) {
        pr.signal_w = mean_rx_w(dep_.bs[serving], ue, sc_.bs_power_w, End::bs, shadow(), los(), map_, sc_);
        for (std::size_t i = 0; i < nb; ++i)
          if (static_cast<int>(i) != serving)
            pr.interferers_w.push_back(mean_rx_w(dep_.bs[i], ue, sc_.bs_power_w, End::bs,
                                                 shadow(), los(), map_, sc_));
      } else {
        pr.signal_w = mean_rx_w(ue, dep_.bs[serving], sc_.cc_ue_power_w, End::bs, shadow(), los(), map_, sc_);
        for (std::size_t i = 0; i < nb; ++i)
          if (static_cast<int>(i) != serving)
            pr.interferers_w.push_back(mean_rx_w(dep_.cc_ues[i], dep_.bs[serving], sc_.cc_ue_power_w,
                                                 End::bs, shadow(), los(), map_, sc_));
      }
    }
    victim_cache_.assign(dep_.d2d.size() * count, -1.0);
    victim_shadow_seed_ = derive_seed(dep_.trial_seed, "victim-shadow", band_index());
    victim_los_seed_ = derive_seed(dep_.trial_seed, "victim-los", band_index());
    baseline_ = probe_outage({});
  }

  double d2d_to_victim(int node, std::size_t probe) const
  {
    const std::size_t count = probes_.size();
    double& cached = victim_cache_[node * count + probe];
    if (cached >= 0.0)
      return cached;
    const double shadow =
        sc_.channel.shadow_sigma_db * counter_normal(victim_shadow_seed_, node * count + probe);
    const double los_u = counter_uniform(victim_los_seed_, node * count + probe);
    const Point tx = dep_.d2d[node].position;
    if (band_ == Band::dl)
      cached = mean_rx_w(tx, probe_points_[probe], sc_.d2d_power_w, End::ue, shadow, los_u, map_, sc_);
    else
      cached = mean_rx_w(tx, dep_.bs[dep_.serving_bs], sc_.d2d_power_w, End::bs, shadow, los_u, map_, sc_);
    return cached;
  }

  const Deployment& dep_;
  const Scenario& sc_;
  const UrbanMap& map_;
  Band band_;
  const LinkTable& links_;
  std::vector<std::vector<double>> ambient_;
  std::vector<double> field_;
  ReachabilityGraph graph_;
  std::vector<Probe> probes_;
  std::vector<Point> probe_points_;
  mutable std::vector<double> victim_cache_;
  std::uint64_t victim_shadow_seed_ = 0;
  std::uint64_t victim_los_seed_ = 0;
  double baseline_ = 0.0;
};

TrialResult run_route_strategy(const BandContext& ctx, const Deployment& dep, const Scenario& sc,
                               Strategy strategy, Band band, const BoundarySet& boundary)
{
  TrialResult res;
  res.strategy = strategy;
  res.band = band;
  res.cc_baseline = ctx.baseline();

  std::optional<Route> route = strategy == Strategy::spr ? route_spr(ctx.graph(), 0, 1)
                                                         : route_iar(ctx.graph(), 0, 1, boundary);
  if (!route) {
    res.outcome = D2dOutcome::route_failure;
    res.cc_outage = ctx.baseline();
    return res;
  }
  res.route_found = true;
  res.hops = route->hop_count();
  res.route_length_m = route->total_length_m;
  res.boundary_violations = route->boundary_violations;

  // Decode-and-forward: transmit hop by hop; a failed hop ends the delivery.
  SeedStream rng(dep.trial_seed, "hops-" + to_string(strategy), ctx.band_index());
  std::vector<std::vector<int>> slots;
  bool delivered = true;
  for (std::size_t h = 1; h < route->hops.size(); ++h) {
    const int u = route->hops[h - 1], v = route->hops[h];
    slots.push_back({u});
    if (!ctx.draw_hop(u, v, rng)) {
      delivered = false;
      break;
    }
  }
  res.transmissions = static_cast<int>(slots.size());
  res.outcome = delivered ? D2dOutcome::success : D2dOutcome::link_outage;
  res.cc_outage = ctx.slot_average(slots);
  (void)sc;
  return res;
}

TrialResult run_broadcast(const BandContext& ctx, const Deployment& dep, Band band)
{
  TrialResult res;
  res.strategy = Strategy::br;
  res.band = band;
  res.cc_baseline = ctx.baseline();

  // Realize every link once: u->v delivers with its exact Rayleigh success.
  const int n = static_cast<int>(dep.d2d.size());
  ReachabilityGraph realized(dep.d2d);
  const std::uint64_t seed = derive_seed(dep.trial_seed, "broadcast", ctx.band_index());
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (u != v) {
        const double p = ctx.link_success(u, v);
        if (p > 0.0 && counter_uniform(seed, static_cast<std::uint64_t>(u) * n + v) < p)
          realized.add_edge(u, v, p);
      }

  const BroadcastOutcome flood = route_br(realized, 0, 1);
  res.transmissions = flood.transmissions;
  // Nodes of one flooding round rebroadcast in the same slot.
  res.cc_outage = ctx.slot_average(flood.waves);
  if (flood.reached) {
    res.outcome = D2dOutcome::success;
    res.route_found = true;
    res.hops = flood.hop_depth;
    res.route_length_m = route_length(realized, flood.path);
  } else {
    const BroadcastOutcome planned = route_br(ctx.graph(), 0, 1);
    res.outcome = planned.reached ? D2dOutcome::link_outage : D2dOutcome::route_failure;
  }
  return res;
}

} // namespace

double umi_los_probability(double d_m) noexcept
{
  const double e = std::exp(-d_m / 36.0);
  return std::min(18.0 / d_m, 1.0) * (1.0 - e) + e;
}

std::vector<TrialResult> run_trial(const Deployment& deployment, const Scenario& scenario, const UrbanMap& map,
                                   const std::vector<Strategy>& strategies, const std::vector<Band>& bands)
{
  if (deployment.d2d.size() < 2)
    throw DomainError("deployment lacks a source/destination pair");
  if (deployment.cc_ues.size() != deployment.bs.size() &&
      std::find(bands.begin(), bands.end(), Band::ul) != bands.end())
    throw ConfigError("d2d.band", "the UL band needs one CC UE per cell");
  const auto shadow_seed = scenario.channel.shadow_sigma_db > 0.0
                               ? std::optional(derive_seed(deployment.trial_seed, "d2d-shadow"))
                               : std::nullopt;
  const LinkTable links =
      compute_link_table(deployment.d2d, map, scenario.channel, scenario.d2d_power_w, shadow_seed);

  CellGeometry cells{deployment.bs, scenario.boundary_tolerance_frac * scenario.bs.isd_m};
  const BoundarySet boundary = boundary_nodes(deployment.d2d, cells);

  std::vector<TrialResult> out;
  out.reserve(strategies.size() * bands.size());
  for (Band band : bands) {
    const BandContext ctx(deployment, scenario, map, band, links);
    for (Strategy s : strategies) {
      if (s == Strategy::br)
        out.push_back(run_broadcast(ctx, deployment, band));
      else
        out.push_back(run_route_strategy(ctx, deployment, scenario, s, band, boundary));
    }
  }
  return out;
}

TrialResult run_trial(const Deployment& deployment, const Scenario& scenario, const UrbanMap& map)
{
  return run_trial(deployment, scenario, map, {scenario.strategy}, {scenario.band}).front();
}

double cc_baseline(const Deployment& deployment, const Scenario& scenario, const UrbanMap& map, int trials,
                   std::uint64_t seed)
{
  if (trials < 1)
    throw DomainError("cc_baseline needs at least one draw");
  SeedStream rng(seed, "cc-baseline");
  const double zeta = scenario.threshold_linear();
  const double sigma = scenario.channel.shadow_sigma_db;
  const double cell_radius = scenario.bs.isd_m / std::sqrt(3.0);
  const int serving = deployment.serving_bs;
  const std::size_t nb = deployment.bs.size();

  long outages = 0;
  for (int t = 0; t < trials; ++t) {
    const Point ue = scenario.bs.kind == BsLayoutKind::ppp
                         ? map.bounds().center()
                         : detail::sample_in_cell(deployment, serving, cell_radius, map, false, rng);
    double signal = 0.0, interference = scenario.channel.noise_power_w;
    if (scenario.band == Band::dl) {
      signal = draw_fading(rng) * mean_rx_w(deployment.bs[serving], ue, scenario.bs_power_w, End::bs,
                                            draw_shadowing(rng, sigma), rng.uniform(), map, scenario);
      for (std::size_t i = 0; i < nb; ++i)
        if (static_cast<int>(i) != serving)
          interference += draw_fading(rng) * mean_rx_w(deployment.bs[i], ue, scenario.bs_power_w, End::bs,
                                                       draw_shadowing(rng, sigma), rng.uniform(), map, scenario);
    } else {
      signal = draw_fading(rng) * mean_rx_w(ue, deployment.bs[serving], scenario.cc_ue_power_w, End::bs,
                                            draw_shadowing(rng, sigma), rng.uniform(), map, scenario);
      for (std::size_t i = 0; i < nb; ++i)
        if (static_cast<int>(i) != serving)
          interference +=
              draw_fading(rng) * mean_rx_w(deployment.cc_ues[i], deployment.bs[serving], scenario.cc_ue_power_w,
                                           End::bs, draw_shadowing(rng, sigma), rng.uniform(), map, scenario);
    }
    if (!(signal >= zeta * interference))
      ++outages;
  }
  return static_cast<double>(outages) / trials;
}

} // namespace d2d
