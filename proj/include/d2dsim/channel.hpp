#pragma once

#include <span>
#include <vector>

#include "d2dsim/env.hpp"
#include "d2dsim/rng.hpp"

namespace d2d {

/// loss(d) = slope*log10(d) + intercept + freq_slope*log10(f_GHz)
struct PathlossCoeffs {
  double slope_db_per_decade = 0.0;
  double intercept_db = 0.0;
  double freq_slope_db_per_decade = 0.0;
};

enum class PathlossLaw {
  umi,       // LOS/NLOS log-distance pair
  power_law, // 10*alpha*log10(d), used to reproduce the stochastic-geometry model
};

struct ChannelModel {
  double carrier_ghz = 2.1;
  PathlossCoeffs los{22.0, 28.0, 20.0};
  PathlossCoeffs nlos{36.7, 22.7, 26.0};
  /// Exponent of the analytic (closed-form) model, distinct from the UMi slopes.
  double alpha = 4.0;
  double shadow_sigma_db = 6.0;
  double noise_power_w = 0.0;
  PathlossLaw law = PathlossLaw::umi;

  /// Throws ConfigError on a broken invariant.
  void validate() const;

  static ChannelModel defaults();
};

double dbm_to_watts(double dbm) noexcept;
double watts_to_dbm(double w) noexcept;
double db_to_linear(double db) noexcept;
double linear_to_db(double x) noexcept;

/// Total noise power for a density in dBm/Hz over a bandwidth.
double noise_power_w(double density_dbm_per_hz, double bandwidth_hz) noexcept;

struct Pathloss {
  double loss_db = 0.0; // distance law plus wall penetration
  bool los = true;
  double wall_loss_db = 0.0;
  int walls = 0;
};

/// Distance-law loss only (no geometry), for a given LOS state.
double distance_loss_db(double d_m, bool los, const ChannelModel& model);

/// `penetration` = false keeps the LOS/NLOS decision but drops wall losses,
/// for links whose far end sits above the rooftops.
Pathloss pathloss_db(Point tx, Point rx, const UrbanMap& map, const ChannelModel& model,
                     bool penetration = true);

/// Rayleigh power gain: exponential with unit mean.
double draw_fading(SeedStream& rng);
/// Zero-mean normal shadowing offset in dB.
double draw_shadowing(SeedStream& rng, double sigma_db);

struct LinkSample {
  Point tx;
  Point rx;
  double tx_power_w = 0.0;
  double fading_gain = 1.0;
  double shadow_db = 0.0;
  double wall_loss_db = 0.0;
  bool los = true;
  /// Distance-law loss, excluding walls.
  double path_loss_db = 0.0;

  double received_power_w() const noexcept;
};

struct SinrQuery {
  LinkSample signal;
  std::vector<LinkSample> interferers;
  double noise_power_w = 0.0;
};

/// gamma = h P / L / (noise + sum h_i P_i / L_i). Returns +inf when the
/// denominator is zero and the signal is not.
double sinr(const SinrQuery& query);

/// P(h S >= zeta (noise + sum h_i I_i)) with every gain Rayleigh:
/// exp(-zeta N / S) * prod 1 / (1 + zeta I_i / S).
double rayleigh_success(double signal_mean_w, std::span<const double> interferer_means_w,
                        double noise_w, double threshold) noexcept;

} // namespace d2d
