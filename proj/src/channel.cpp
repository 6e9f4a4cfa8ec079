#include "d2dsim/channel.hpp"

#include <cmath>
#include <limits>

#include "d2dsim/errors.hpp"

namespace d2d {

void ChannelModel::validate() const
{
  if (!(carrier_ghz > 0.0))
    throw ConfigError("channel.carrier_ghz", "must be positive");
  if (!(los.slope_db_per_decade > 0.0))
    throw ConfigError("channel.los", "slope must be positive");
  if (!(nlos.slope_db_per_decade > 0.0))
    throw ConfigError("channel.nlos", "slope must be positive");
  if (!(alpha > 2.0))
    throw ConfigError("channel.alpha", "must exceed 2");
  if (!(shadow_sigma_db >= 0.0))
    throw ConfigError("channel.shadow_sigma_db", "must be non-negative");
  if (!(noise_power_w >= 0.0))
    throw ConfigError("channel.noise_dbm_per_hz", "noise power must be non-negative");
}

ChannelModel ChannelModel::defaults()
{
  ChannelModel m;
  m.noise_power_w = d2d::noise_power_w(-162.0, 20e6);
  return m;
}

double dbm_to_watts(double dbm) noexcept { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watts_to_dbm(double w) noexcept { return 10.0 * std::log10(w) + 30.0; }
double db_to_linear(double db) noexcept { return std::pow(10.0, db / 10.0); }
double linear_to_db(double x) noexcept { return 10.0 * std::log10(x); }

double noise_power_w(double density_dbm_per_hz, double bandwidth_hz) noexcept
{
  return dbm_to_watts(density_dbm_per_hz + 10.0 * std::log10(bandwidth_hz));
}

double distance_loss_db(double d_m, bool los, const ChannelModel& model)
{
  if (!(d_m > 0.0))
    throw DomainError("pathloss at zero distance");
  if (model.law == PathlossLaw::power_law)
    return 10.0 * model.alpha * std::log10(d_m);
  const PathlossCoeffs& c = los ? model.los : model.nlos;
  return c.slope_db_per_decade * std::log10(d_m) + c.intercept_db +
         c.freq_slope_db_per_decade * std::log10(model.carrier_ghz);
}

Pathloss pathloss_db(Point tx, Point rx, const UrbanMap& map, const ChannelModel& model, bool penetration)
{
  const double d = distance(tx, rx);
  if (!(d > 0.0))
    throw DomainError("pathloss between coincident points");
  const CrossingSummary walls = crossing_summary(tx, rx, map);
  Pathloss out;
  out.los = walls.count == 0;
  out.walls = walls.count;
  out.wall_loss_db = penetration ? walls.loss_db : 0.0;
  out.loss_db = distance_loss_db(d, out.los, model) + out.wall_loss_db;
  return out;
}

double draw_fading(SeedStream& rng)
{
  return rng.exponential();
}

double draw_shadowing(SeedStream& rng, double sigma_db)
{
  return sigma_db > 0.0 ? rng.normal(sigma_db) : 0.0;
}

double LinkSample::received_power_w() const noexcept
{
  return tx_power_w * fading_gain * db_to_linear(shadow_db - path_loss_db - wall_loss_db);
}

double sinr(const SinrQuery& query)
{
  double denom = query.noise_power_w;
  for (const auto& i : query.interferers) {
    if (!(i.rx == query.signal.rx))
      throw DomainError("interferer does not share the signal's receiver");
    denom += i.received_power_w();
  }
  const double s = query.signal.received_power_w();
  if (denom <= 0.0)
    return s > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return s / denom;
}

double rayleigh_success(double signal_mean_w, std::span<const double> interferer_means_w, double noise_w,
                        double threshold) noexcept
{
  if (!(signal_mean_w > 0.0))
    return 0.0;
  const double k = threshold / signal_mean_w;
  double p = std::exp(-k * noise_w);
  for (double i : interferer_means_w)
    p /= 1.0 + k * i;
  return p;
}

} // namespace d2d
