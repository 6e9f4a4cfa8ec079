#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "d2dsim/errors.hpp"
#include "d2dsim/sim.hpp"

namespace d2d {

std::string to_string(SweepAxis a)
{
  switch (a) {
  case SweepAxis::none:
    return "none";
  case SweepAxis::ue_density:
    return "ue_density";
  case SweepAxis::wall_loss:
    return "wall_loss";
  case SweepAxis::pair_distance:
    return "pair_distance";
  case SweepAxis::cc_constraint:
    return "cc_constraint";
  }
  return "?";
}

SweepAxis parse_axis(const std::string& s)
{
  for (SweepAxis a : {SweepAxis::none, SweepAxis::ue_density, SweepAxis::wall_loss, SweepAxis::pair_distance,
                      SweepAxis::cc_constraint})
    if (to_string(a) == s)
      return a;
  throw ConfigError("sweep.axis", "unknown axis '" + s +
                                      "' (expected none, ue_density, wall_loss, pair_distance, cc_constraint)");
}

Wilson wilson_interval(long successes, long trials, double z)
{
  if (trials <= 0)
    return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::clamp(centre - half, 0.0, p), std::clamp(centre + half, p, 1.0)};
}

namespace {

struct Tally {
  long trials = 0;
  long successes = 0;
  long routed = 0;
  double hops = 0.0;
  double length = 0.0;
  double cc = 0.0;
  double baseline = 0.0;

  void add(const TrialResult& r)
  {
    ++trials;
    if (r.outcome == D2dOutcome::success)
      ++successes;
    if (r.route_found) {
      ++routed;
      hops += r.hops;
      length += r.route_length_m;
    }
    cc += r.cc_outage;
    baseline += r.cc_baseline;
  }

  SweepRow row(double axis_value, Strategy s, Band b) const
  {
    SweepRow out;
    out.axis_value = axis_value;
    out.strategy = to_string(s);
    out.band = to_string(b);
    out.trials = trials;
    out.d2d_success = trials ? static_cast<double>(successes) / trials : 0.0;
    const Wilson w = wilson_interval(successes, trials);
    out.ci_low = w.low;
    out.ci_high = w.high;
    out.mean_hops = routed ? hops / routed : 0.0;
    out.mean_route_len_m = routed ? length / routed : 0.0;
    out.cc_outage = trials ? cc / trials : 0.0;
    out.cc_baseline = trials ? baseline / trials : 0.0;
    return out;
  }
};

bool row_less(const SweepRow& a, const SweepRow& b)
{
  if (a.axis_value != b.axis_value)
    return a.axis_value < b.axis_value;
  if (a.strategy != b.strategy)
    return a.strategy < b.strategy;
  return a.band < b.band;
}

} // namespace

std::vector<SweepRow> evaluate_point(const Scenario& scenario, const UrbanMap& map,
                                     const std::vector<Strategy>& strategies, const std::vector<Band>& bands,
                                     double axis_value, const RunOptions& options)
{
  scenario.validate();
  if (strategies.empty() || bands.empty())
    throw ConfigError("sweep.strategies", "at least one strategy and one band are required");

  const int trials = scenario.trials;
  std::vector<std::vector<TrialResult>> results(trials);
  const int workers = std::clamp(options.workers, 1, trials);

  std::mutex progress_mutex;
  long done = 0;
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto work = [&](int first) {
    try {
      for (int t = first; t < trials; t += workers) {
        {
          std::lock_guard lock(failure_mutex);
          if (failure)
            return;
        }
        const Deployment dep = deploy(scenario, map, t);
        results[t] = run_trial(dep, scenario, map, strategies, bands);
        if (options.progress) {
          std::lock_guard lock(progress_mutex);
          options.progress(++done, trials);
        }
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure)
        failure = std::current_exception();
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back(work, w);
    for (auto& th : pool)
      th.join();
  }
  if (failure)
    std::rethrow_exception(failure);

  // Aggregate in trial order so the sums do not depend on the worker count.
  std::vector<Tally> tallies(strategies.size() * bands.size());
  for (const auto& per_trial : results)
    for (std::size_t k = 0; k < per_trial.size(); ++k)
      tallies[k].add(per_trial[k]);

  std::vector<SweepRow> rows;
  for (std::size_t b = 0; b < bands.size(); ++b)
    for (std::size_t s = 0; s < strategies.size(); ++s)
      rows.push_back(tallies[b * strategies.size() + s].row(axis_value, strategies[s], bands[b]));
  return rows;
}

Scenario apply_axis(const Scenario& base, SweepAxis axis, double value)
{
  Scenario s = base;
  switch (axis) {
  case SweepAxis::ue_density:
    s.d2d_density_per_km2 = value;
    break;
  case SweepAxis::wall_loss:
    s.wall_loss_db = value;
    break;
  case SweepAxis::pair_distance:
    s.pair_distance = value;
    break;
  case SweepAxis::none:
  case SweepAxis::cc_constraint:
    break;
  }
  return s;
}

std::vector<SweepRow> sweep(const SweepSpec& spec, const Scenario& base, const RunOptions& options)
{
  Scenario templ = base;
  if (spec.trials_per_point > 0)
    templ.trials = spec.trials_per_point;
  std::vector<double> grid = spec.grid;
  if (grid.empty()) {
    if (spec.axis != SweepAxis::none)
      throw ConfigError("sweep.grid", "must not be empty");
    grid.push_back(0.0);
  }

  std::vector<SweepRow> rows;
  if (spec.axis == SweepAxis::cc_constraint) {
    for (double c : grid)
      if (!(c >= 0.0 && c <= 1.0))
        throw ConfigError("sweep.grid", "constraints must lie in [0, 1]");
    const UrbanMap map = build_map(templ);
    const auto points = evaluate_point(templ, map, spec.strategies, spec.bands, 0.0, options);
    std::vector<OperatingPoint> evaluated;
    for (const auto& r : points)
      evaluated.push_back({parse_strategy(r.strategy), parse_band(r.band), 1.0 - r.d2d_success, r.cc_outage});
    for (double c : grid) {
      const StrategyChoice choice = select_strategy(c, evaluated);
      if (!choice.chosen) {
        SweepRow none;
        none.axis_value = c;
        none.strategy = "none";
        none.band = "none";
        rows.push_back(none);
        continue;
      }
      for (std::size_t i = 0; i < evaluated.size(); ++i)
        if (evaluated[i].strategy == choice.chosen->strategy && evaluated[i].band == choice.chosen->band) {
          SweepRow r = points[i];
          r.axis_value = c;
          rows.push_back(r);
          break;
        }
    }
  } else {
    std::optional<UrbanMap> shared;
    if (spec.axis != SweepAxis::wall_loss)
      shared = build_map(templ);
    for (double v : grid) {
      const Scenario sc = apply_axis(templ, spec.axis, v);
      const UrbanMap map = shared ? *shared : build_map(sc);
      auto point = evaluate_point(sc, map, spec.strategies, spec.bands, v, options);
      rows.insert(rows.end(), point.begin(), point.end());
    }
  }
  std::stable_sort(rows.begin(), rows.end(), row_less);
  return rows;
}

std::string results_csv(const std::vector<SweepRow>& rows)
{
  std::ostringstream out;
  out << "axis_value,strategy,band,trials,d2d_success,ci_low,ci_high,mean_hops,mean_route_len_m,cc_outage,"
         "cc_baseline\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.6f,%s,%s,%ld,%.6f,%.6f,%.6f,%.4f,%.3f,%.6f,%.6f\n", r.axis_value,
                  r.strategy.c_str(), r.band.c_str(), r.trials, r.d2d_success, r.ci_low, r.ci_high, r.mean_hops,
                  r.mean_route_len_m, r.cc_outage, r.cc_baseline);
    out << buf;
  }
  return out.str();
}

StrategyChoice select_strategy(double constraint, const std::vector<OperatingPoint>& evaluated)
{
  if (evaluated.empty())
    throw DomainError("select_strategy needs at least one evaluated operating point");
  StrategyChoice choice;
  choice.constraint = constraint;
  for (const auto& p : evaluated)
    if (p.cc_outage <= constraint)
      choice.admissible.push_back(p);
  for (const auto& p : choice.admissible)
    if (!choice.chosen || p.d2d_outage < choice.chosen->d2d_outage)
      choice.chosen = p;
  return choice;
}

} // namespace d2d
