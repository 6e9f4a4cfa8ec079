#include "d2dsim/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <random>
#include <sstream>
#include <vector>

#include "d2dsim/errors.hpp"
#include "d2dsim/rng.hpp"

namespace d2d::analytics {

namespace {

// 15-point Kronrod rule with its embedded 7-point Gauss rule.
constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <typename F>
Segment gauss_kronrod(F&& f, double a, double b)
{
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double s = f(c - dx) + f(c + dx);
    kronrod += kWgk[j] * s;
    if (j % 2 == 1)
      gauss += kWg[j / 2] * s;
  }
  return {a, b, kronrod * h, std::abs((kronrod - gauss) * h)};
}

template <typename F>
double integrate_adaptive(F&& f, double a, double b, double abs_tol, int max_segments)
{
  std::priority_queue<Segment> heap;
  Segment first = gauss_kronrod(f, a, b);
  double total = first.value, err = first.error;
  heap.push(first);
  while (err > abs_tol) {
    if (static_cast<int>(heap.size()) >= max_segments) {
      std::ostringstream msg;
      msg << "adaptive quadrature did not converge on [" << a << ", " << b << "]: "
          << heap.size() << " segments, estimate " << total << ", error " << err
          << " > tolerance " << abs_tol;
      throw NumericalError(msg.str());
    }
    const Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const Segment left = gauss_kronrod(f, worst.a, mid);
    const Segment right = gauss_kronrod(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to shed the drift of the running updates.
  double sum = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    heap.pop();
  }
  return sum;
}

void check_a_args(double threshold, double alpha)
{
  if (!(threshold > 0.0))
    throw DomainError("A-function threshold must be positive");
  if (!(alpha > 2.0))
    throw DomainError("A-function exponent must exceed 2");
}

} // namespace

double a_function_quadrature(double threshold, double alpha)
{
  check_a_args(threshold, alpha);
  // With u = zeta^(-2/alpha) / t the prefactor cancels and the integrand is
  // t^(alpha/2 - 2) / (t^(alpha/2) + 1/zeta) on (0, 1].
  const double half = 0.5 * alpha;
  const double inv_zeta = 1.0 / threshold;
  auto f = [=](double t) { return std::pow(t, half - 2.0) / (std::pow(t, half) + inv_zeta); };
  return integrate_adaptive(f, 0.0, 1.0, 1e-10, 20000);
}

double a_function(double threshold, double alpha)
{
  check_a_args(threshold, alpha);
  if (alpha == 4.0) {
    const double s = std::sqrt(threshold);
    return s * std::atan(s);
  }
  return a_function_quadrature(threshold, alpha);
}

double cc_link_success(const SgParams& params, double r_m)
{
  return std::exp(-params.bs_density_per_m2 * std::numbers::pi * r_m * r_m *
                  a_function(params.threshold, params.alpha));
}

double cc_outage_closed_form(const SgParams& params, double r_up_m, double r_down_m)
{
  if (!(r_up_m >= 0.0) || !(r_down_m >= 0.0))
    throw DomainError("link distances must be non-negative");
  if (!(params.bs_density_per_m2 >= 0.0))
    throw DomainError("BS density must be non-negative");
  const double a = a_function(params.threshold, params.alpha);
  return 1.0 - std::exp(-params.bs_density_per_m2 * std::numbers::pi *
                        (r_up_m * r_up_m + r_down_m * r_down_m) * a);
}

double cc_end_to_end_outage(double p_up_success, double p_down_success)
{
  return 1.0 - p_up_success * p_down_success;
}

double d2d_route_outage(std::span<const double> per_hop_outage)
{
  double success = 1.0;
  for (double p : per_hop_outage) {
    if (!(p >= 0.0 && p <= 1.0))
      throw DomainError("hop outage outside [0, 1]");
    success *= 1.0 - p;
  }
  return 1.0 - success;
}

ClosedFormCheck validate_cc_closed_form(const SgParams& params, double r_m, long trials, std::uint64_t seed)
{
  if (!(r_m > 0.0))
    throw DomainError("validation distance must be positive");
  ClosedFormCheck out;
  out.trials = trials;
  out.analytic = cc_link_success(params, r_m);

  const double lam = params.bs_density_per_m2;
  const double alpha = params.alpha, zeta = params.threshold;
  // Truncate the field where the neglected tail exponent,
  // 2 pi lam zeta r^alpha R^(2 - alpha) / (alpha - 2), drops below 1e-3.
  double outer = 10.0 * r_m;
  if (lam > 0.0) {
    const double need = 2.0 * std::numbers::pi * lam * zeta * std::pow(r_m, alpha) / ((alpha - 2.0) * 1e-3);
    outer = std::max(outer, std::pow(need, 1.0 / (alpha - 2.0)));
  }
  const double r2 = r_m * r_m, outer2 = outer * outer;
  const double mean_count = lam * std::numbers::pi * (outer2 - r2);

  SeedStream rng(seed, "ppp-validate");
  auto& eng = rng.engine();
  std::poisson_distribution<long> count(mean_count > 0.0 ? mean_count : 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);

  const double signal_gain = alpha == 4.0 ? 1.0 / (r2 * r2) : std::pow(r_m, -alpha);
  long success = 0;
  for (long k = 0; k < trials; ++k) {
    const double signal = expo(eng) * signal_gain;
    const double bar = signal / zeta;
    double interference = 0.0;
    const long n = mean_count > 0.0 ? count(eng) : 0;
    for (long i = 0; i < n && interference <= bar; ++i) {
      const double s = r2 + unif(eng) * (outer2 - r2); // squared radius, area-uniform
      const double g = alpha == 4.0 ? 1.0 / (s * s) : std::pow(s, -0.5 * alpha);
      interference += expo(eng) * g;
    }
    if (signal >= zeta * interference)
      ++success;
  }
  out.empirical = trials > 0 ? static_cast<double>(success) / static_cast<double>(trials) : 0.0;
  out.abs_gap = std::abs(out.empirical - out.analytic);
  return out;
}

} // namespace d2d::analytics
