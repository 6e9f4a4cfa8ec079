#include <cmath>
#include <vector>

#include <doctest.h>

#include "d2dsim/channel.hpp"
#include "d2dsim/errors.hpp"

using namespace d2d;

namespace {

LinkSample at(Point tx, Point rx, double loss_db, double power = 1.0)
{
  LinkSample s;
  s.tx = tx;
  s.rx = rx;
  s.tx_power_w = power;
  s.path_loss_db = loss_db;
  return s;
}

} // namespace

TEST_CASE("UMi distance laws")
{
  const ChannelModel m = ChannelModel::defaults();
  const double los = 22.0 * std::log10(100.0) + 28.0 + 20.0 * std::log10(2.1);
  const double nlos = 36.7 * std::log10(100.0) + 22.7 + 26.0 * std::log10(2.1);
  CHECK(distance_loss_db(100.0, true, m) == doctest::Approx(los).epsilon(1e-12));
  CHECK(distance_loss_db(100.0, false, m) == doctest::Approx(nlos).epsilon(1e-12));
  CHECK(los == doctest::Approx(78.44).epsilon(1e-4));
  CHECK(nlos == doctest::Approx(104.48).epsilon(1e-4));
  CHECK_THROWS_AS(distance_loss_db(0.0, true, m), DomainError);
}

TEST_CASE("pathloss with and without a building")
{
  const ChannelModel m = ChannelModel::defaults();
  const UrbanMap open = UrbanMap::create({200, 200}, {}, 10.0);
  const UrbanMap blocked = UrbanMap::create({200, 200}, {Building{{{90, 40}, {110, 40}, {110, 60}, {90, 60}}, 10, {}}},
                                            10.0);
  const Pathloss a = pathloss_db({50, 50}, {150, 50}, open, m);
  const Pathloss b = pathloss_db({50, 50}, {150, 50}, blocked, m);
  CHECK(a.los);
  CHECK_FALSE(b.los);
  CHECK(b.walls == 2);
  CHECK(b.wall_loss_db == doctest::Approx(20.0));
  CHECK(b.loss_db - a.loss_db >= 20.0);
  CHECK(pathloss_db({150, 50}, {50, 50}, blocked, m).loss_db == doctest::Approx(b.loss_db));
  const Pathloss c = pathloss_db({50, 50}, {150, 50}, blocked, m, false);
  CHECK_FALSE(c.los);
  CHECK(c.wall_loss_db == 0.0);
  CHECK_THROWS_AS(pathloss_db({1, 1}, {1, 1}, open, m), DomainError);
}

TEST_CASE("pathloss is monotone in distance for a fixed state")
{
  const ChannelModel m = ChannelModel::defaults();
  for (bool los : {true, false}) {
    double prev = distance_loss_db(1.0, los, m);
    for (double d = 2.0; d < 2000.0; d *= 1.3) {
      const double cur = distance_loss_db(d, los, m);
      CHECK(cur >= prev);
      prev = cur;
    }
  }
}

TEST_CASE("equal coefficients and no wall loss depend only on distance")
{
  ChannelModel m = ChannelModel::defaults();
  m.nlos = m.los;
  const UrbanMap city = UrbanMap::create({200, 200}, {Building{{{90, 40}, {110, 40}, {110, 60}, {90, 60}}, 10, {}}},
                                         0.0);
  CHECK(pathloss_db({50, 50}, {150, 50}, city, m).loss_db ==
        doctest::Approx(pathloss_db({50, 150}, {150, 150}, city, m).loss_db));
}

TEST_CASE("noise power")
{
  CHECK(watts_to_dbm(noise_power_w(-162.0, 20e6)) == doctest::Approx(-162.0 + 10.0 * std::log10(20e6)));
  CHECK(dbm_to_watts(30.0) == doctest::Approx(1.0));
  CHECK(db_to_linear(-6.0) == doctest::Approx(0.251188643150958));
  CHECK(linear_to_db(10.0) == doctest::Approx(10.0));
}

TEST_CASE("Rayleigh fading draws")
{
  SeedStream rng(42, "fading");
  const int n = 1000000;
  double sum = 0.0;
  int above = 0;
  bool nonneg = true;
  for (int i = 0; i < n; ++i) {
    const double h = draw_fading(rng);
    nonneg = nonneg && h >= 0.0;
    sum += h;
    above += h > 0.6931;
  }
  CHECK(nonneg);
  CHECK(sum / n == doctest::Approx(1.0).epsilon(0.01));
  CHECK(double(above) / n == doctest::Approx(0.5).epsilon(0.02));

  SeedStream a(7, "x"), b(7, "x");
  for (int i = 0; i < 100; ++i)
    CHECK(draw_fading(a) == draw_fading(b));
}

TEST_CASE("log-normal shadowing draws")
{
  SeedStream rng(3, "shadow");
  for (int i = 0; i < 100; ++i)
    CHECK(draw_shadowing(rng, 0.0) == 0.0);
  const int n = 1000000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = draw_shadowing(rng, 6.0);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(std::sqrt(s2 / n - mean * mean) - 6.0) < 0.05);
}

TEST_CASE("SINR examples")
{
  const Point rx{0, 0};
  SinrQuery q{at({1, 0}, rx, 0.0), {}, 0.1};
  CHECK(sinr(q) == doctest::Approx(10.0));

  q = SinrQuery{at({1, 0}, rx, 0.0), {at({0, 1}, rx, 0.0)}, 0.0};
  CHECK(sinr(q) == doctest::Approx(1.0));

  const double l2 = 40.0 * std::log10(2.0);
  q = SinrQuery{at({1, 0}, rx, 0.0), {at({2, 0}, rx, l2), at({-2, 0}, rx, l2)}, 0.0};
  CHECK(sinr(q) == doctest::Approx(8.0));

  q = SinrQuery{at({1, 0}, rx, 0.0), {}, 0.0};
  CHECK(std::isinf(sinr(q)));

  q = SinrQuery{at({1, 0}, rx, 0.0), {at({2, 0}, {5, 5}, 0.0)}, 0.0};
  CHECK_THROWS_AS(sinr(q), DomainError);
}

TEST_CASE("SINR is scale invariant and decreasing in interference")
{
  SeedStream rng(99);
  const Point rx{0, 0};
  for (int t = 0; t < 200; ++t) {
    SinrQuery q{at({1, 0}, rx, rng.uniform(40, 100), rng.uniform(0.1, 2)), {}, rng.uniform(1e-12, 1e-9)};
    const int k = static_cast<int>(rng.uniform(0, 5));
    for (int i = 0; i < k; ++i)
      q.interferers.push_back(at({2, 1}, rx, rng.uniform(40, 120), rng.uniform(0.1, 40)));
    const double g = sinr(q);

    SinrQuery scaled = q;
    const double c = rng.uniform(0.01, 100);
    scaled.signal.tx_power_w *= c;
    scaled.noise_power_w *= c;
    for (auto& i : scaled.interferers)
      i.tx_power_w *= c;
    CHECK(sinr(scaled) == doctest::Approx(g).epsilon(1e-9));

    SinrQuery more = q;
    more.interferers.push_back(at({3, 3}, rx, rng.uniform(40, 120)));
    CHECK(sinr(more) <= g);
    SinrQuery louder = more;
    louder.interferers.back().tx_power_w *= 2.0;
    CHECK(sinr(louder) < sinr(more));
  }
}

TEST_CASE("Rayleigh success closed form against direct draws")
{
  const double s = 1e-9, noise = 2e-10;
  const std::vector<double> interf{3e-10, 1e-10};
  const double zeta = 0.251188643150958;
  const double p = rayleigh_success(s, interf, noise, zeta);
  CHECK(p == doctest::Approx(std::exp(-zeta * noise / s) / (1 + zeta * 3e-10 / s) / (1 + zeta * 1e-10 / s)));

  SeedStream rng(1);
  const int n = 200000;
  int ok = 0;
  for (int i = 0; i < n; ++i) {
    double den = noise;
    for (double w : interf)
      den += w * draw_fading(rng);
    ok += s * draw_fading(rng) >= zeta * den;
  }
  const double se = std::sqrt(p * (1 - p) / n);
  CHECK(std::abs(double(ok) / n - p) < 4 * se);
  CHECK(rayleigh_success(0.0, interf, noise, zeta) == 0.0);
}

TEST_CASE("channel model validation")
{
  ChannelModel m = ChannelModel::defaults();
  CHECK_NOTHROW(m.validate());
  m.alpha = 2.0;
  CHECK_THROWS_AS(m.validate(), ConfigError);
  m = ChannelModel::defaults();
  m.shadow_sigma_db = -1;
  CHECK_THROWS_AS(m.validate(), ConfigError);
  m = ChannelModel::defaults();
  m.los.slope_db_per_decade = 0;
  CHECK_THROWS_AS(m.validate(), ConfigError);
}
