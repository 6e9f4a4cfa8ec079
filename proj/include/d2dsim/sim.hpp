#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "d2dsim/channel.hpp"
#include "d2dsim/env.hpp"
#include "d2dsim/routing.hpp"

namespace d2d {

enum class Band { dl, ul };
enum class Strategy { spr, iar, br };

std::string to_string(Band b);
std::string to_string(Strategy s);
Band parse_band(const std::string& s);         // throws ConfigError
Strategy parse_strategy(const std::string& s); // throws ConfigError

enum class BsLayoutKind {
  hex,
  /// Stochastic-geometry check layout: probe anchored at the map centre, the
  /// serving BS at `probe_distance_m` from it and a Poisson field of other BSs
  /// outside that radius.
  ppp,
};

struct BsLayout {
  BsLayoutKind kind = BsLayoutKind::hex;
  int rings = 1;
  double isd_m = 500.0;
  /// Direction of the first neighbour site, degrees.
  double orientation_deg = 30.0;
  double ppp_density_per_km2 = 0.0;
  double ppp_radius_m = 3000.0;
  double probe_distance_m = 100.0;
};

enum class BsLinkModel {
  los_probability, // LOS drawn per link with the UMi LOS probability, no wall loss
  nlos,            // NLOS distance law, no wall loss
  geometric,       // street-level: plan-view LOS test, walls per bs_links_penetrate
};

/// UMi LOS probability min(18/d, 1) * (1 - exp(-d/36)) + exp(-d/36).
double umi_los_probability(double d_m) noexcept;

enum class PairPlacement {
  map,          // anywhere outdoors in the map
  serving_cell, // both endpoints inside the serving (central) cell
};

struct Scenario {
  // [map]
  std::optional<std::string> map_file;
  ManhattanSpec manhattan;
  std::uint64_t map_seed = 1;
  /// Replaces the map's default wall loss (generated or loaded) when set.
  std::optional<double> wall_loss_db;
  // [bs]
  BsLayout bs;
  double bs_power_w = 40.0;
  double bs_height_m = 45.0;
  BsLinkModel bs_link_model = BsLinkModel::nlos;
  /// Geometric model only: whether links with a BS end pay wall loss.
  bool bs_links_penetrate = true;
  double cc_ue_power_w = 0.2;
  int cc_probes_per_trial = 8;
  // [channel]
  ChannelModel channel = ChannelModel::defaults();
  double noise_dbm_per_hz = -162.0;
  double bandwidth_hz = 20e6;
  // [d2d]
  double d2d_power_w = 0.1;
  double d2d_density_per_km2 = 400.0;
  double pair_distance = 0.7; // fraction of the cell diameter
  PairPlacement pair_placement = PairPlacement::map;
  Band band = Band::dl;
  Strategy strategy = Strategy::spr;
  double threshold_db = -6.0;
  double admit_probability = 0.5;
  int fading_samples = 64;
  double boundary_tolerance_frac = 0.1; // of the inter-site distance
  // [seed] / run
  int trials = 1000;
  std::uint64_t master_seed = 1;

  double threshold_linear() const noexcept;
  double cell_diameter_m() const noexcept { return bs.isd_m; }
  /// Throws ConfigError naming section.field.
  void validate() const;
};

/// Map described by the scenario (generated or loaded), built once per run.
UrbanMap build_map(const Scenario& scenario);

struct Deployment {
  std::vector<Point> bs;
  int serving_bs = 0;
  /// One co-channel CC UE per cell (index = BS index).
  std::vector<Point> cc_ues;
  /// Node 0 is the source, node 1 the destination, the rest are relays.
  std::vector<RelayNode> d2d;
  std::uint64_t trial_seed = 0;
  std::size_t relay_count() const noexcept { return d2d.size() >= 2 ? d2d.size() - 2 : 0; }
};

std::vector<Point> hex_sites(Point center, int rings, double isd_m, double orientation_deg);

/// Deterministic per (scenario, trial_index). Throws DeploymentError when the
/// source/destination pair cannot be placed.
Deployment deploy(const Scenario& scenario, const UrbanMap& map, int trial_index);

enum class D2dOutcome { success, route_failure, link_outage };
std::string to_string(D2dOutcome o);

struct TrialResult {
  D2dOutcome outcome = D2dOutcome::route_failure;
  Strategy strategy = Strategy::spr;
  Band band = Band::dl;
  bool route_found = false;
  int hops = 0;
  double route_length_m = 0.0;
  int transmissions = 0;
  int boundary_violations = 0;
  double cc_outage = 0.0;
  double cc_baseline = 0.0;
};

/// Runs the scenario's configured strategy and band on one deployment.
TrialResult run_trial(const Deployment& deployment, const Scenario& scenario, const UrbanMap& map);

/// Runs several strategy/band combinations on one deployment, sharing the
/// link budget. Results follow the order of the (band, strategy) product.
std::vector<TrialResult> run_trial(const Deployment& deployment, const Scenario& scenario, const UrbanMap& map,
                                   const std::vector<Strategy>& strategies, const std::vector<Band>& bands);

/// Fraction of CC probe draws in outage with no D2D active (explicit fading
/// draws, probe uniform in the serving cell or at the layout's fixed anchor).
double cc_baseline(const Deployment& deployment, const Scenario& scenario, const UrbanMap& map, int trials,
                   std::uint64_t seed);

enum class SweepAxis { none, ue_density, wall_loss, pair_distance, cc_constraint };
std::string to_string(SweepAxis a);
SweepAxis parse_axis(const std::string& s);

struct SweepSpec {
  SweepAxis axis = SweepAxis::ue_density;
  std::vector<double> grid;
  std::vector<Strategy> strategies{Strategy::spr, Strategy::iar, Strategy::br};
  std::vector<Band> bands{Band::dl};
  int trials_per_point = 0; // 0: use the scenario's trials
};

struct Wilson {
  double low = 0.0;
  double high = 0.0;
};
/// Wilson score interval at z (1.96 for 95 %).
Wilson wilson_interval(long successes, long trials, double z = 1.959963984540054);

struct SweepRow {
  double axis_value = 0.0;
  std::string strategy;
  std::string band;
  long trials = 0;
  double d2d_success = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double mean_hops = 0.0;
  double mean_route_len_m = 0.0;
  double cc_outage = 0.0;
  double cc_baseline = 0.0;
};

struct RunOptions {
  int workers = 1;
  std::function<void(long done, long total)> progress;
};

/// Runs `trials` deployments of `scenario` and aggregates each strategy/band.
std::vector<SweepRow> evaluate_point(const Scenario& scenario, const UrbanMap& map,
                                     const std::vector<Strategy>& strategies, const std::vector<Band>& bands,
                                     double axis_value, const RunOptions& options);

Scenario apply_axis(const Scenario& base, SweepAxis axis, double value);

/// Full sweep, rows stable-sorted by (axis_value, strategy, band).
std::vector<SweepRow> sweep(const SweepSpec& spec, const Scenario& base, const RunOptions& options);

std::string results_csv(const std::vector<SweepRow>& rows);

struct OperatingPoint {
  Strategy strategy = Strategy::spr;
  Band band = Band::dl;
  double d2d_outage = 0.0;
  double cc_outage = 0.0;
};

struct StrategyChoice {
  double constraint = 0.0;
  std::vector<OperatingPoint> admissible;
  std::optional<OperatingPoint> chosen;
};

/// Keeps points with cc_outage <= constraint and picks the lowest d2d_outage
/// (ties: first in input order). No admissible point means no D2D.
StrategyChoice select_strategy(double constraint, const std::vector<OperatingPoint>& evaluated);

} // namespace d2d
