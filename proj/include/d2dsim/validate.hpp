#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace d2d {

struct Check {
  std::string suite;
  std::string name;
  double gap = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct ValidateOptions {
  long ppp_trials = 100000;
  /// Deployments for the simulator-vs-closed-form cross-check.
  int layout_draws = 2000;
  std::uint64_t seed = 1;
};

/// Oracle suites: A-function quadrature, PPP Monte-Carlo vs closed form,
/// route outage vs enumeration, flooding vs BFS, simulated PPP layout vs
/// closed form.
std::vector<Check> run_validation(const ValidateOptions& options);

/// "suite,name,gap,tolerance,status" rows.
std::string checks_csv(const std::vector<Check>& checks);

struct AnalyzeOptions {
  std::vector<double> densities_per_km2{1.0, 3.0, 5.0};
  std::vector<double> distances_m{100.0, 200.0, 300.0};
  double threshold_db = -6.0;
  long trials = 100000;
  std::uint64_t seed = 1;
};

/// Closed-form vs Monte-Carlo link success table:
/// density_per_km2,r_m,threshold_db,a_function,analytic_success,empirical_success,abs_gap,trials
std::string analyze_csv(const AnalyzeOptions& options);

} // namespace d2d
