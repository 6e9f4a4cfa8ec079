#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "d2dsim/errors.hpp"
#include "d2dsim/sim.hpp"
#include "sim_internal.hpp"

namespace d2d {

std::string to_string(Band b)
{
  return b == Band::dl ? "DL" : "UL";
}

std::string to_string(Strategy s)
{
  switch (s) {
  case Strategy::spr:
    return "SPR";
  case Strategy::iar:
    return "IAR";
  case Strategy::br:
    return "BR";
  }
  return "?";
}

namespace {
std::string lower(std::string s)
{
  for (char& c : s)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}
} // namespace

Band parse_band(const std::string& s)
{
  const std::string v = lower(s);
  if (v == "dl")
    return Band::dl;
  if (v == "ul")
    return Band::ul;
  throw ConfigError("d2d.band", "expected DL or UL, got '" + s + "'");
}

Strategy parse_strategy(const std::string& s)
{
  const std::string v = lower(s);
  if (v == "spr")
    return Strategy::spr;
  if (v == "iar")
    return Strategy::iar;
  if (v == "br")
    return Strategy::br;
  throw ConfigError("d2d.strategy", "expected SPR, IAR or BR, got '" + s + "'");
}

std::string to_string(D2dOutcome o)
{
  switch (o) {
  case D2dOutcome::success:
    return "success";
  case D2dOutcome::route_failure:
    return "route-failure";
  case D2dOutcome::link_outage:
    return "link-outage";
  }
  return "?";
}

double Scenario::threshold_linear() const noexcept
{
  return db_to_linear(threshold_db);
}

void Scenario::validate() const
{
  channel.validate();
  if (!(bs_power_w > 0.0))
    throw ConfigError("bs.power_w", "must be positive");
  if (!(cc_ue_power_w > 0.0))
    throw ConfigError("bs.cc_ue_power_w", "must be positive");
  if (!(d2d_power_w > 0.0))
    throw ConfigError("d2d.power_w", "must be positive");
  if (!(d2d_density_per_km2 >= 0.0))
    throw ConfigError("d2d.density_per_km2", "must be non-negative");
  if (!(pair_distance > 0.0 && pair_distance <= 1.0))
    throw ConfigError("d2d.pair_distance", "must lie in (0, 1]");
  if (trials < 1)
    throw ConfigError("seed.trials", "must be at least 1");
  if (fading_samples < 1)
    throw ConfigError("d2d.fading_samples", "must be at least 1");
  if (!(admit_probability >= 0.0 && admit_probability <= 1.0))
    throw ConfigError("d2d.admit_probability", "must lie in [0, 1]");
  if (!(boundary_tolerance_frac > 0.0))
    throw ConfigError("d2d.boundary_tolerance", "must be positive");
  if (!(bs.isd_m > 0.0))
    throw ConfigError("bs.isd_m", "must be positive");
  if (bs.kind == BsLayoutKind::hex && bs.rings < 0)
    throw ConfigError("bs.rings", "must be non-negative");
  if (bs.kind == BsLayoutKind::ppp) {
    if (!(bs.ppp_density_per_km2 >= 0.0))
      throw ConfigError("bs.ppp_density_per_km2", "must be non-negative");
    if (!(bs.probe_distance_m > 0.0 && bs.probe_distance_m < bs.ppp_radius_m))
      throw ConfigError("bs.probe_distance_m", "must lie in (0, ppp_radius_m)");
    if (band == Band::ul)
      throw ConfigError("d2d.band", "the ppp layout supports the DL band only");
  }
  if (wall_loss_db && !(*wall_loss_db >= 0.0 && *wall_loss_db <= 60.0))
    throw ConfigError("map.wall_loss_db", "must lie in [0, 60]");
  if (cc_probes_per_trial < 1)
    throw ConfigError("bs.probes_per_trial", "must be at least 1");
}

UrbanMap build_map(const Scenario& scenario)
{
  if (scenario.map_file) {
    std::ifstream in(*scenario.map_file);
    if (!in)
      throw ConfigError("map.file", "cannot open '" + *scenario.map_file + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    UrbanMap m = load_map(buf.str());
    return scenario.wall_loss_db ? m.with_default_wall_loss(*scenario.wall_loss_db) : m;
  }
  ManhattanSpec spec = scenario.manhattan;
  if (scenario.wall_loss_db)
    spec.default_wall_loss_db = *scenario.wall_loss_db;
  return generate_manhattan_map(spec, scenario.map_seed);
}

std::vector<Point> hex_sites(Point center, int rings, double isd_m, double orientation_deg)
{
  const double th = orientation_deg * std::numbers::pi / 180.0;
  const Point e1{std::cos(th), std::sin(th)};
  const Point e2{std::cos(th + std::numbers::pi / 3.0), std::sin(th + std::numbers::pi / 3.0)};
  std::vector<Point> sites{center};
  for (int ring = 1; ring <= rings; ++ring) {
    for (int q = -ring; q <= ring; ++q) {
      for (int r = -ring; r <= ring; ++r) {
        const int s = -q - r;
        if (std::max({std::abs(q), std::abs(r), std::abs(s)}) != ring)
          continue;
        sites.push_back({center.x + isd_m * (q * e1.x + r * e2.x), center.y + isd_m * (q * e1.y + r * e2.y)});
      }
    }
  }
  return sites;
}

namespace detail {

int nearest_site(Point p, const std::vector<Point>& sites)
{
  int best = 0;
  double best_d = distance(p, sites[0]);
  for (std::size_t i = 1; i < sites.size(); ++i) {
    const double d = distance(p, sites[i]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

bool usable_ue_position(Point p, const UrbanMap& map)
{
  // UEs outside the mapped area stand in open terrain.
  return !map.bounds().contains(p) || is_outdoor(p, map);
}

Point sample_in_cell(const Deployment& dep, int cell, double radius_m, const UrbanMap& map, bool within_map,
                     SeedStream& rng)
{
  const Point c = dep.bs[cell];
  for (int attempt = 0; attempt < 20000; ++attempt) {
    // Area-uniform in the disk, then rejected to the Voronoi cell.
    const double r = radius_m * std::sqrt(rng.uniform());
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const Point p{c.x + r * std::cos(phi), c.y + r * std::sin(phi)};
    if (within_map && !map.bounds().contains(p))
      continue;
    if (nearest_site(p, dep.bs) != cell || !usable_ue_position(p, map))
      continue;
    return p;
  }
  throw DeploymentError("could not place a UE inside cell " + std::to_string(cell));
}

} // namespace detail

Deployment deploy(const Scenario& scenario, const UrbanMap& map, int trial_index)
{
  Deployment dep;
  dep.trial_seed = derive_seed(scenario.master_seed, "trial", static_cast<std::uint64_t>(trial_index));
  const Point center = map.bounds().center();
  const double cell_radius = scenario.bs.isd_m / std::sqrt(3.0);

  if (scenario.bs.kind == BsLayoutKind::hex) {
    dep.bs = hex_sites(center, scenario.bs.rings, scenario.bs.isd_m, scenario.bs.orientation_deg);
  } else {
    SeedStream rng(dep.trial_seed, "ppp-bs");
    const double r = scenario.bs.probe_distance_m, outer = scenario.bs.ppp_radius_m;
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    dep.bs.push_back({center.x + r * std::cos(phi), center.y + r * std::sin(phi)});
    const double lam = scenario.bs.ppp_density_per_km2 * 1e-6;
    const double mean = lam * std::numbers::pi * (outer * outer - r * r);
    const long n = mean > 0.0 ? std::poisson_distribution<long>(mean)(rng.engine()) : 0;
    for (long i = 0; i < n; ++i) {
      const double rr = std::sqrt(r * r + rng.uniform() * (outer * outer - r * r));
      const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
      dep.bs.push_back({center.x + rr * std::cos(a), center.y + rr * std::sin(a)});
    }
  }
  dep.serving_bs = 0;

  if (scenario.bs.kind == BsLayoutKind::hex) {
    SeedStream rng(dep.trial_seed, "cc-ues");
    dep.cc_ues.reserve(dep.bs.size());
    for (std::size_t i = 0; i < dep.bs.size(); ++i)
      dep.cc_ues.push_back(detail::sample_in_cell(dep, static_cast<int>(i), cell_radius, map, false, rng));
  }

  // Relays: Poisson count over the whole map area, placed outdoors.
  SeedStream count_rng(dep.trial_seed, "d2d-count");
  const double mean_relays = scenario.d2d_density_per_km2 * map.bounds().area() * 1e-6;
  const long relays = mean_relays > 0.0 ? std::poisson_distribution<long>(mean_relays)(count_rng.engine()) : 0;
  const auto relay_points =
      sample_outdoor_points(map, static_cast<std::size_t>(relays), derive_seed(dep.trial_seed, "relays"));

  // Source/destination pair at the target separation.
  const double target = scenario.pair_distance * scenario.cell_diameter_m();
  SeedStream rng(dep.trial_seed, "pair");
  const auto& bounds = map.bounds();
  const bool in_cell = scenario.pair_placement == PairPlacement::serving_cell;
  const auto acceptable = [&](Point p) {
    if (!bounds.contains(p) || !is_outdoor(p, map))
      return false;
    return !in_cell || detail::nearest_site(p, dep.bs) == dep.serving_bs;
  };
  std::optional<std::pair<Point, Point>> pair;
  for (int attempt = 0; attempt < 100000 && !pair; ++attempt) {
    const Point src{rng.uniform(0.0, bounds.width_m), rng.uniform(0.0, bounds.height_m)};
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const Point dst{src.x + target * std::cos(phi), src.y + target * std::sin(phi)};
    if (acceptable(src) && acceptable(dst))
      pair.emplace(src, dst);
  }
  if (!pair)
    throw DeploymentError("cannot place a source/destination pair " + std::to_string(target) +
                          " m apart within the attempt budget");

  dep.d2d.reserve(relay_points.size() + 2);
  dep.d2d.push_back({0, pair->first, NodeRole::source});
  dep.d2d.push_back({1, pair->second, NodeRole::destination});
  for (const Point& p : relay_points)
    dep.d2d.push_back({static_cast<int>(dep.d2d.size()), p, NodeRole::relay});
  return dep;
}

} // namespace d2d
