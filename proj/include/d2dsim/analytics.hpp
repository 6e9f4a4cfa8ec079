#pragma once

#include <cstdint>
#include <span>

namespace d2d::analytics {

struct SgParams {
  double bs_density_per_m2 = 0.0;
  double alpha = 4.0;
  double threshold = 0.251188643150958; // -6 dB
};

/// Interference integral
///   A(zeta, alpha) = int_{zeta^(-2/alpha)}^inf zeta^(2/alpha) / (1 + u^(alpha/2)) du.
/// Uses sqrt(zeta) * atan(sqrt(zeta)) when alpha == 4, quadrature otherwise.
double a_function(double threshold, double alpha);

/// Always integrates numerically (adaptive Gauss-Kronrod, abs tol 1e-10),
/// after mapping u -> zeta^(-2/alpha) / t onto t in (0, 1].
/// Throws NumericalError when the error budget cannot be met.
double a_function_quadrature(double threshold, double alpha);

/// Downlink-style outage: 1 - exp(-density * pi * (r_up^2 + r_down^2) * A).
double cc_outage_closed_form(const SgParams& params, double r_up_m, double r_down_m);

/// Single-link success exp(-density * pi * r^2 * A).
double cc_link_success(const SgParams& params, double r_m);

/// 1 - p_up * p_down.
double cc_end_to_end_outage(double p_up_success, double p_down_success);

/// Decode-and-forward route outage 1 - prod_j (1 - outage_j).
double d2d_route_outage(std::span<const double> per_hop_outage);

struct ClosedFormCheck {
  double empirical = 0.0;
  double analytic = 0.0;
  double abs_gap = 0.0;
  long trials = 0;
};

/// Monte-Carlo counterpart of cc_link_success: a Rayleigh-faded transmitter
/// at distance r against a Poisson field of interferers outside r,
/// interference-limited, unit powers, path loss d^-alpha.
ClosedFormCheck validate_cc_closed_form(const SgParams& params, double r_m, long trials,
                                        std::uint64_t seed);

} // namespace d2d::analytics
