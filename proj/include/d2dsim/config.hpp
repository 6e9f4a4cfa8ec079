#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "d2dsim/sim.hpp"

namespace d2d {

struct RunConfig {
  Scenario scenario;
  SweepSpec sweep;
};

/// Shipped defaults: the reference scenario plus a density sweep.
RunConfig default_config();

using EnvLookup = std::function<std::optional<std::string>(const std::string& name)>;

/// Reads the process environment.
std::optional<std::string> process_env(const std::string& name);

/// Parses sectioned key=value text ([map], [bs], [channel], [d2d], [sweep],
/// [seed]) over the defaults, then applies D2DSIM_<SECTION>_<KEY> variables
/// from `env`. Unknown sections/keys and bad values throw ConfigError naming
/// section.key.
RunConfig parse_config(const std::string& text, const EnvLookup& env = process_env);

/// Sets one key, e.g. set_config_value(cfg, "d2d", "density_per_km2", "200").
void set_config_value(RunConfig& cfg, const std::string& section, const std::string& key,
                      const std::string& value);

/// Every key with its resolved value, in table order.
std::vector<std::pair<std::string, std::string>> resolved_entries(const RunConfig& cfg);

/// Resolved configuration in the same sectioned format parse_config reads.
std::string dump_config(const RunConfig& cfg);

} // namespace d2d
