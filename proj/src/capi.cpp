#include "d2dsim/d2dsim.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "d2dsim/config.hpp"
#include "d2dsim/errors.hpp"
#include "d2dsim/validate.hpp"

struct d2d_config {
  d2d::RunConfig cfg;
};

struct d2d_map {
  d2d::UrbanMap map;
};

namespace {

#ifndef D2DSIM_VERSION
#define D2DSIM_VERSION "0.0.0"
#endif

thread_local std::string last_error;

int fail(int code, const std::string& msg)
{
  last_error = msg;
  return code;
}

template <class F>
int guarded(F&& f)
{
  try {
    last_error.clear();
    return f();
  } catch (const d2d::ConfigError& e) {
    return fail(D2D_ERR_CONFIG, e.what());
  } catch (const d2d::Error& e) {
    return fail(D2D_ERR_RUNTIME, e.what());
  } catch (const std::bad_alloc&) {
    return fail(D2D_ERR_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return fail(D2D_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(D2D_ERR_RUNTIME, "unknown error");
  }
}

char* dup(const std::string& s)
{
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p)
    throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

d2d::EnvLookup env_for(int use_env)
{
  return use_env ? d2d::EnvLookup(d2d::process_env) : d2d::EnvLookup();
}

} // namespace

extern "C" {

const char* d2d_version(void)
{
  return D2DSIM_VERSION;
}

const char* d2d_last_error(void)
{
  return last_error.c_str();
}

void d2d_string_free(char* s)
{
  std::free(s);
}

int d2d_config_parse(const char* text, int use_env, d2d_config** out)
{
  if (!out)
    return fail(D2D_ERR_USAGE, "null output handle");
  return guarded([&] {
    auto c = std::make_unique<d2d_config>();
    c->cfg = d2d::parse_config(text ? text : "", env_for(use_env));
    *out = c.release();
    return D2D_OK;
  });
}

int d2d_config_load_file(const char* path, int use_env, d2d_config** out)
{
  if (!path || !out)
    return fail(D2D_ERR_USAGE, "null argument");
  std::ifstream in(path);
  if (!in)
    return fail(D2D_ERR_CONFIG, std::string("cannot open config file '") + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  return d2d_config_parse(text.c_str(), use_env, out);
}

int d2d_config_set(d2d_config* cfg, const char* section, const char* key, const char* value)
{
  if (!cfg || !section || !key || !value)
    return fail(D2D_ERR_USAGE, "null argument");
  return guarded([&] {
    d2d::set_config_value(cfg->cfg, section, key, value);
    return D2D_OK;
  });
}

int d2d_config_validate(const d2d_config* cfg)
{
  if (!cfg)
    return fail(D2D_ERR_USAGE, "null config");
  return guarded([&] {
    cfg->cfg.scenario.validate();
    if (cfg->cfg.sweep.axis != d2d::SweepAxis::none && cfg->cfg.sweep.grid.empty())
      throw d2d::ConfigError("sweep.grid", "must not be empty");
    return D2D_OK;
  });
}

int d2d_config_dump(const d2d_config* cfg, char** out)
{
  if (!cfg || !out)
    return fail(D2D_ERR_USAGE, "null argument");
  return guarded([&] {
    *out = dup(d2d::dump_config(cfg->cfg));
    return D2D_OK;
  });
}

void d2d_config_free(d2d_config* cfg)
{
  delete cfg;
}

int d2d_map_build(const d2d_config* cfg, d2d_map** out)
{
  if (!cfg || !out)
    return fail(D2D_ERR_USAGE, "null argument");
  return guarded([&] {
    *out = new d2d_map{d2d::build_map(cfg->cfg.scenario)};
    return D2D_OK;
  });
}

int d2d_map_load(const char* text, d2d_map** out)
{
  if (!text || !out)
    return fail(D2D_ERR_USAGE, "null argument");
  return guarded([&] {
    *out = new d2d_map{d2d::load_map(text)};
    return D2D_OK;
  });
}

int d2d_map_serialize(const d2d_map* map, char** out)
{
  if (!map || !out)
    return fail(D2D_ERR_USAGE, "null argument");
  return guarded([&] {
    *out = dup(d2d::serialize_map(map->map));
    return D2D_OK;
  });
}

int d2d_map_building_count(const d2d_map* map, size_t* out)
{
  if (!map || !out)
    return fail(D2D_ERR_USAGE, "null argument");
  *out = map->map.buildings().size();
  return D2D_OK;
}

void d2d_map_free(d2d_map* map)
{
  delete map;
}

int d2d_simulate(const d2d_config* cfg, int workers, char** csv_out)
{
  if (!cfg || !csv_out)
    return fail(D2D_ERR_USAGE, "null argument");
  if (workers < 1)
    return fail(D2D_ERR_USAGE, "workers must be at least 1");
  return guarded([&] {
    const d2d::Scenario& sc = cfg->cfg.scenario;
    sc.validate();
    const d2d::UrbanMap map = d2d::build_map(sc);
    std::vector<d2d::TrialResult> results(sc.trials);
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex m;
    const int w = std::min(workers, sc.trials);
    for (int k = 0; k < w; ++k)
      pool.emplace_back([&, k] {
        try {
          for (int t = k; t < sc.trials; t += w)
            results[t] = d2d::run_trial(d2d::deploy(sc, map, t), sc, map);
        } catch (...) {
          std::lock_guard lock(m);
          if (!failure)
            failure = std::current_exception();
        }
      });
    for (auto& th : pool)
      th.join();
    if (failure)
      std::rethrow_exception(failure);

    std::ostringstream out;
    out << "trial,strategy,band,outcome,hops,route_len_m,transmissions,boundary_violations,cc_outage,cc_baseline\n";
    char buf[256];
    for (int t = 0; t < sc.trials; ++t) {
      const auto& r = results[t];
      std::snprintf(buf, sizeof buf, "%d,%s,%s,%s,%d,%.3f,%d,%d,%.6f,%.6f\n", t, d2d::to_string(r.strategy).c_str(),
                    d2d::to_string(r.band).c_str(), d2d::to_string(r.outcome).c_str(), r.hops, r.route_length_m,
                    r.transmissions, r.boundary_violations, r.cc_outage, r.cc_baseline);
      out << buf;
    }
    *csv_out = dup(out.str());
    return D2D_OK;
  });
}

int d2d_sweep(const d2d_config* cfg, int workers, d2d_progress_fn progress, void* user, char** csv_out)
{
  if (!cfg || !csv_out)
    return fail(D2D_ERR_USAGE, "null argument");
  if (workers < 1)
    return fail(D2D_ERR_USAGE, "workers must be at least 1");
  return guarded([&] {
    d2d::RunOptions opts;
    opts.workers = workers;
    if (progress)
      opts.progress = [progress, user](long done, long total) { progress(done, total, user); };
    const auto rows = d2d::sweep(cfg->cfg.sweep, cfg->cfg.scenario, opts);
    *csv_out = dup(d2d::results_csv(rows));
    return D2D_OK;
  });
}

int d2d_analyze(const d2d_config* cfg, long trials, char** csv_out)
{
  if (!cfg || !csv_out)
    return fail(D2D_ERR_USAGE, "null argument");
  if (trials < 1)
    return fail(D2D_ERR_USAGE, "trials must be positive");
  return guarded([&] {
    d2d::AnalyzeOptions o;
    o.threshold_db = cfg->cfg.scenario.threshold_db;
    o.trials = trials;
    o.seed = cfg->cfg.scenario.master_seed;
    *csv_out = dup(d2d::analyze_csv(o));
    return D2D_OK;
  });
}

int d2d_validate(uint64_t seed, long ppp_trials, char** report_out)
{
  if (!report_out)
    return fail(D2D_ERR_USAGE, "null argument");
  if (ppp_trials < 1)
    return fail(D2D_ERR_USAGE, "trials must be positive");
  return guarded([&] {
    d2d::ValidateOptions o;
    o.seed = seed;
    o.ppp_trials = ppp_trials;
    const auto checks = d2d::run_validation(o);
    *report_out = dup(d2d::checks_csv(checks));
    for (const auto& c : checks)
      if (!c.passed)
        return fail(D2D_ERR_TOLERANCE, "validation check failed: " + c.suite + " " + c.name);
    return static_cast<int>(D2D_OK);
  });
}

int d2d_manifest(const d2d_config* cfg, const char* command, int workers, char** json_out)
{
  if (!cfg || !command || !json_out)
    return fail(D2D_ERR_USAGE, "null argument");
  return guarded([&] {
    nlohmann::ordered_json j;
    j["tool"] = "d2dsim";
    j["version"] = D2DSIM_VERSION;
    j["command"] = command;
    j["master_seed"] = cfg->cfg.scenario.master_seed;
    j["workers"] = workers;
    nlohmann::ordered_json conf = nlohmann::ordered_json::object();
    for (const auto& [key, value] : d2d::resolved_entries(cfg->cfg))
      conf[key] = value;
    j["config"] = conf;
    j["config_text"] = d2d::dump_config(cfg->cfg);
    *json_out = dup(j.dump(2) + "\n");
    return D2D_OK;
  });
}

} // extern "C"
