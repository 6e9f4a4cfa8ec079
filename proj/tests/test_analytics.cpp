#include <cmath>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "d2dsim/analytics.hpp"
#include "d2dsim/rng.hpp"

using namespace d2d;
using namespace d2d::analytics;

namespace {

constexpr double kMinus6dB = 0.251188643150958;

// Composite Simpson on the integral after u = a / s^2 with a = zeta^(-2/alpha):
//   A = int_0^1 2 c a s^(alpha-3) / (s^alpha + a^(alpha/2)) ds,  c = zeta^(2/alpha).
double simpson_a(double zeta, double alpha)
{
  const double c = std::pow(zeta, 2.0 / alpha);
  const double a = 1.0 / c;
  const auto f = [&](double s) {
    return 2.0 * c * a * std::pow(s, alpha - 3.0) / (std::pow(s, alpha) + std::pow(a, alpha / 2.0));
  };
  const int n = 200000;
  const double h = 1.0 / n;
  double sum = f(0.0) + f(1.0);
  for (int i = 1; i < n; ++i)
    sum += f(i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

// Every 2^J success/failure pattern, summing the probability of those with
// at least one failed hop.
double enumerate_outage(const std::vector<double>& q)
{
  const std::size_t j = q.size();
  double out = 0.0;
  for (unsigned mask = 0; mask < (1u << j); ++mask) {
    double p = 1.0;
    for (std::size_t k = 0; k < j; ++k)
      p *= (mask >> k & 1u) ? q[k] : 1.0 - q[k];
    if (mask != 0)
      out += p;
  }
  return out;
}

} // namespace

TEST_CASE("A function at alpha 4")
{
  CHECK(a_function(1.0, 4.0) == doctest::Approx(std::numbers::pi / 4).epsilon(1e-12));
  CHECK(a_function(1e-12, 4.0) < 1e-11);
  CHECK(a_function(kMinus6dB, 4.0) == doctest::Approx(0.23298).epsilon(1e-3));
  CHECK(a_function(kMinus6dB, 4.0) == doctest::Approx(0.2328500575).epsilon(1e-9));
  CHECK(std::abs(a_function(kMinus6dB, 4.0) - simpson_a(kMinus6dB, 4.0)) < 1e-9);
}

TEST_CASE("quadrature agrees with the arctangent form")
{
  for (double z : {0.01, 0.1, 0.2512, 1.0, 3.0, 10.0, 100.0}) {
    const double closed = std::sqrt(z) * std::atan(std::sqrt(z));
    CHECK(std::abs(a_function_quadrature(z, 4.0) - closed) < 1e-9);
  }
}

TEST_CASE("quadrature at other exponents")
{
  for (double alpha : {3.0, 3.5, 5.0})
    for (double z : {0.1, kMinus6dB, 2.0}) {
      CAPTURE(alpha);
      CAPTURE(z);
      CHECK(a_function(z, alpha) == doctest::Approx(simpson_a(z, alpha)).epsilon(1e-6));
    }
}

TEST_CASE("A is increasing in the threshold")
{
  double prev = 0.0;
  for (double z = 0.01; z < 200.0; z *= 1.5) {
    const double a = a_function(z, 4.0);
    CHECK(a > prev);
    prev = a;
    const double b3 = a_function(z, 3.0);
    CHECK(b3 > 0.0);
  }
}

TEST_CASE("closed-form CC outage")
{
  SgParams p;
  p.bs_density_per_m2 = 0.0;
  CHECK(cc_outage_closed_form(p, 200, 200) == 0.0);
  p.bs_density_per_m2 = 1e-6;
  CHECK(cc_outage_closed_form(p, 0, 0) == 0.0);
  const double expect = 1.0 - std::exp(-1e-6 * std::numbers::pi * 80000.0 * 0.23298);
  CHECK(cc_outage_closed_form(p, 200, 200) == doctest::Approx(expect).epsilon(1e-4));
  CHECK(cc_outage_closed_form(p, 200, 200) == doctest::Approx(0.0569).epsilon(2e-3));

  const double s = cc_link_success(p, 200);
  CHECK(cc_outage_closed_form(p, 200, 200) == doctest::Approx(cc_end_to_end_outage(s, s)).epsilon(1e-12));

  double prev = -1.0;
  for (double d = 0.0; d <= 10e-6; d += 1e-6) {
    p.bs_density_per_m2 = d;
    const double o = cc_outage_closed_form(p, 150, 100);
    CHECK(o > prev);
    CHECK(o < 1.0);
    prev = o;
  }
  p.bs_density_per_m2 = 3e-6;
  CHECK(cc_outage_closed_form(p, 150, 200) > cc_outage_closed_form(p, 150, 100));
  CHECK(cc_outage_closed_form(p, 200, 100) > cc_outage_closed_form(p, 150, 100));
}

TEST_CASE("end-to-end CC outage")
{
  CHECK(cc_end_to_end_outage(1.0, 1.0) == 0.0);
  CHECK(cc_end_to_end_outage(0.9, 0.8) == doctest::Approx(0.28));
  for (double x : {0.0, 0.3, 1.0})
    CHECK(cc_end_to_end_outage(0.0, x) == 1.0);
}

TEST_CASE("route outage")
{
  CHECK(d2d_route_outage(std::vector<double>{0, 0, 0}) == 0.0);
  CHECK(d2d_route_outage(std::vector<double>{0.1, 0.1}) == doctest::Approx(0.19));
  CHECK(d2d_route_outage(std::vector<double>{0.2, 1.0, 0.0}) == 1.0);
  CHECK(d2d_route_outage(std::vector<double>{}) == 0.0);
}

TEST_CASE("route outage matches enumeration and is monotone")
{
  SeedStream rng(2024);
  for (int t = 0; t < 50; ++t) {
    const int j = 1 + static_cast<int>(rng.uniform(0, 10));
    std::vector<double> q(j);
    for (double& x : q)
      x = rng.uniform();
    const double r = d2d_route_outage(q);
    CHECK(std::abs(r - enumerate_outage(q)) < 1e-12);

    std::vector<double> longer = q;
    longer.push_back(rng.uniform());
    CHECK(d2d_route_outage(longer) >= r);
    std::vector<double> worse = q;
    worse[0] = std::min(1.0, worse[0] + 0.1);
    CHECK(d2d_route_outage(worse) >= r);
  }
}

TEST_CASE("PPP Monte-Carlo oracle")
{
  SgParams p;
  p.bs_density_per_m2 = 0.0;
  CHECK(validate_cc_closed_form(p, 200, 10000, 1).empirical == 1.0);

  p.bs_density_per_m2 = 3e-6;
  const ClosedFormCheck c = validate_cc_closed_form(p, 200, 100000, 7);
  CHECK(c.analytic == doctest::Approx(cc_link_success(p, 200)));
  CHECK(c.abs_gap < 0.01);
  CHECK(c.trials == 100000);

  SgParams dbl = p;
  dbl.bs_density_per_m2 = 6e-6;
  const ClosedFormCheck d = validate_cc_closed_form(dbl, 200, 100000, 7);
  const double se = std::sqrt(c.empirical * (1 - c.empirical) / 1e5 + d.empirical * (1 - d.empirical) / 1e5);
  CHECK(c.empirical - d.empirical > 3 * se);
}

TEST_CASE("PPP gap shrinks with more trials")
{
  SgParams p;
  p.bs_density_per_m2 = 5e-6;
  double worst_small = 0.0, worst_large = 0.0;
  for (std::uint64_t s = 1; s <= 4; ++s) {
    worst_small = std::max(worst_small, validate_cc_closed_form(p, 300, 10000, s).abs_gap);
    worst_large = std::max(worst_large, validate_cc_closed_form(p, 300, 160000, s).abs_gap);
  }
  CHECK(worst_small < 4.0 * 0.5 / std::sqrt(1e4));
  CHECK(worst_large < 4.0 * 0.5 / std::sqrt(1.6e5));
}
