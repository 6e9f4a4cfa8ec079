#include "d2dsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "d2dsim/errors.hpp"

namespace d2d {

namespace {

std::string trim(std::string s)
{
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string lower(std::string s)
{
  for (char& c : s)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string upper(std::string s)
{
  for (char& c : s)
    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::string fmt(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_list(const std::string& s)
{
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (auto t = trim(item); !t.empty())
      out.push_back(t);
  return out;
}

template <class F>
std::string join(const std::vector<F>& items, const std::function<std::string(const F&)>& f)
{
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i)
    out += (i ? "," : "") + f(items[i]);
  return out;
}

double to_double(const std::string& where, const std::string& s)
{
  const std::string t = trim(s);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || end != t.data() + t.size() || t.empty() || !std::isfinite(v))
    throw ConfigError(where, "expected a number, got '" + s + "'");
  return v;
}

long long to_int(const std::string& where, const std::string& s)
{
  const std::string t = trim(s);
  long long v = 0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || end != t.data() + t.size() || t.empty())
    throw ConfigError(where, "expected an integer, got '" + s + "'");
  return v;
}

int to_int32(const std::string& where, const std::string& s)
{
  const long long v = to_int(where, s);
  if (v < -2147483647LL || v > 2147483647LL)
    throw ConfigError(where, "integer out of range");
  return static_cast<int>(v);
}

std::uint64_t to_u64(const std::string& where, const std::string& s)
{
  const std::string t = trim(s);
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || end != t.data() + t.size() || t.empty())
    throw ConfigError(where, "expected a non-negative integer, got '" + s + "'");
  return v;
}

bool to_bool(const std::string& where, const std::string& s)
{
  const std::string t = lower(trim(s));
  if (t == "true" || t == "1" || t == "yes" || t == "on")
    return true;
  if (t == "false" || t == "0" || t == "no" || t == "off")
    return false;
  throw ConfigError(where, "expected true or false, got '" + s + "'");
}

struct Key {
  const char* section;
  const char* name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string& where, const std::string&)> set;
};

#define D2D_NUM(sec, key, field)                                                                          \
  Key                                                                                                      \
  {                                                                                                        \
    sec, key, [](const RunConfig& c) { return fmt(c.field); },                                            \
        [](RunConfig& c, const std::string& w, const std::string& v) { c.field = to_double(w, v); }      \
  }
#define D2D_INT(sec, key, field)                                                                          \
  Key                                                                                                      \
  {                                                                                                        \
    sec, key, [](const RunConfig& c) { return std::to_string(c.field); },                                 \
        [](RunConfig& c, const std::string& w, const std::string& v) { c.field = to_int32(w, v); }       \
  }
#define D2D_BOOL(sec, key, field)                                                                         \
  Key                                                                                                      \
  {                                                                                                        \
    sec, key, [](const RunConfig& c) { return std::string(c.field ? "true" : "false"); },                 \
        [](RunConfig& c, const std::string& w, const std::string& v) { c.field = to_bool(w, v); }        \
  }

void refresh_noise(RunConfig& c)
{
  c.scenario.channel.noise_power_w = noise_power_w(c.scenario.noise_dbm_per_hz, c.scenario.bandwidth_hz);
}

const std::vector<Key>& key_table()
{
  static const std::vector<Key> table = {
      // [map]
      {"map", "file", [](const RunConfig& c) { return c.scenario.map_file.value_or(""); },
       [](RunConfig& c, const std::string&, const std::string& v) {
         const std::string t = trim(v);
         c.scenario.map_file = t.empty() ? std::nullopt : std::optional(t);
       }},
      {"map", "seed", [](const RunConfig& c) { return std::to_string(c.scenario.map_seed); },
       [](RunConfig& c, const std::string& w, const std::string& v) { c.scenario.map_seed = to_u64(w, v); }},
      D2D_NUM("map", "width_m", scenario.manhattan.bounds.width_m),
      D2D_NUM("map", "height_m", scenario.manhattan.bounds.height_m),
      D2D_NUM("map", "block_m", scenario.manhattan.block_size_m),
      D2D_NUM("map", "street_m", scenario.manhattan.street_width_m),
      D2D_NUM("map", "fill_ratio", scenario.manhattan.building_fill_ratio),
      D2D_NUM("map", "jitter_m", scenario.manhattan.jitter_m),
      D2D_NUM("map", "building_height_m", scenario.manhattan.building_height_m),
      D2D_BOOL("map", "min_one_building", scenario.manhattan.min_one_building),
      D2D_NUM("map", "default_wall_loss_db", scenario.manhattan.default_wall_loss_db),
      {"map", "wall_loss_db",
       [](const RunConfig& c) { return c.scenario.wall_loss_db ? fmt(*c.scenario.wall_loss_db) : std::string(); },
       [](RunConfig& c, const std::string& w, const std::string& v) {
         c.scenario.wall_loss_db = trim(v).empty() ? std::nullopt : std::optional(to_double(w, v));
       }},
      // [bs]
      {"bs", "layout",
       [](const RunConfig& c) { return std::string(c.scenario.bs.kind == BsLayoutKind::hex ? "hex" : "ppp"); },
       [](RunConfig& c, const std::string& w, const std::string& v) {
         const std::string t = lower(trim(v));
         if (t == "hex")
           c.scenario.bs.kind = BsLayoutKind::hex;
         else if (t == "ppp")
           c.scenario.bs.kind = BsLayoutKind::ppp;
         else
           throw ConfigError(w, "expected hex or ppp, got '" + v + "'");
       }},
      D2D_INT("bs", "rings", scenario.bs.rings),
      D2D_NUM("bs", "isd_m", scenario.bs.isd_m),
      D2D_NUM("bs", "orientation_deg", scenario.bs.orientation_deg),
      D2D_NUM("bs", "ppp_density_per_km2", scenario.bs.ppp_density_per_km2),
      D2D_NUM("bs", "ppp_radius_m", scenario.bs.ppp_radius_m),
      D2D_NUM("bs", "probe_distance_m", scenario.bs.probe_distance_m),
      D2D_NUM("bs", "power_w", scenario.bs_power_w),
      D2D_NUM("bs", "height_m", scenario.bs_height_m),
      {"bs", "link_model",
       [](const RunConfig& c) {
         switch (c.scenario.bs_link_model) {
         case BsLinkModel::los_probability:
           return std::string("los_probability");
         case BsLinkModel::nlos:
           return std::string("nlos");
         case BsLinkModel::geometric:
           break;
         }
         return std::string("geometric");
       },
       [](RunConfig& c, const std::string& w, const std::string& v) {
         const std::string t = lower(trim(v));
         if (t == "los_probability")
           c.scenario.bs_link_model = BsLinkModel::los_probability;
         else if (t == "nlos")
           c.scenario.bs_link_model = BsLinkModel::nlos;
         else if (t == "geometric")
           c.scenario.bs_link_model = BsLinkModel::geometric;
         else
           throw ConfigError(w, "expected los_probability, nlos or geometric, got '" + v + "'");
       }},
      D2D_BOOL("bs", "links_penetrate", scenario.bs_links_penetrate),
      D2D_NUM("bs", "cc_ue_power_w", scenario.cc_ue_power_w),
      D2D_INT("bs", "probes_per_trial", scenario.cc_probes_per_trial),
      // [channel]
      {"channel", "law",
       [](const RunConfig& c) {
         return std::string(c.scenario.channel.law == PathlossLaw::umi ? "umi" : "power_law");
       },
       [](RunConfig& c, const std::string& w, const std::string& v) {
         const std::string t = lower(trim(v));
         if (t == "umi")
           c.scenario.channel.law = PathlossLaw::umi;
         else if (t == "power_law")
           c.scenario.channel.law = PathlossLaw::power_law;
         else
           throw ConfigError(w, "expected umi or power_law, got '" + v + "'");
       }},
      D2D_NUM("channel", "carrier_ghz", scenario.channel.carrier_ghz),
      D2D_NUM("channel", "los_slope", scenario.channel.los.slope_db_per_decade),
      D2D_NUM("channel", "los_intercept", scenario.channel.los.intercept_db),
      D2D_NUM("channel", "los_freq_slope", scenario.channel.los.freq_slope_db_per_decade),
      D2D_NUM("channel", "nlos_slope", scenario.channel.nlos.slope_db_per_decade),
      D2D_NUM("channel", "nlos_intercept", scenario.channel.nlos.intercept_db),
      D2D_NUM("channel", "nlos_freq_slope", scenario.channel.nlos.freq_slope_db_per_decade),
      D2D_NUM("channel", "alpha", scenario.channel.alpha),
      D2D_NUM("channel", "shadow_sigma_db", scenario.channel.shadow_sigma_db),
      {"channel", "noise_dbm_per_hz", [](const RunConfig& c) { return fmt(c.scenario.noise_dbm_per_hz); },
       [](RunConfig& c, const std::string& w, const std::string& v) {
         c.scenario.noise_dbm_per_hz = to_double(w, v);
         refresh_noise(c);
       }},
      {"channel", "bandwidth_hz", [](const RunConfig& c) { return fmt(c.scenario.bandwidth_hz); },
       [](RunConfig& c, const std::string& w, const std::string& v) {
         const double bw = to_double(w, v);
         if (!(bw > 0.0))
           throw ConfigError(w, "must be positive");
         c.scenario.bandwidth_hz = bw;
         refresh_noise(c);
       }},
      // [d2d]
      D2D_NUM("d2d", "power_w", scenario.d2d_power_w),
      D2D_NUM("d2d", "density_per_km2", scenario.d2d_density_per_km2),
      D2D_NUM("d2d", "pair_distance", scenario.pair_distance),
      {"d2d", "pair_placement",
       [](const RunConfig& c) {
         return std::string(c.scenario.pair_placement == PairPlacement::map ? "map" : "serving_cell");
       },
       [](RunConfig& c, const std::string& w, const std::string& v) {
         const std::string t = lower(trim(v));
         if (t == "map")
           c.scenario.pair_placement = PairPlacement::map;
         else if (t == "serving_cell")
           c.scenario.pair_placement = PairPlacement::serving_cell;
         else
           throw ConfigError(w, "expected map or serving_cell, got '" + v + "'");
       }},
      {"d2d", "band", [](const RunConfig& c) { return to_string(c.scenario.band); },
       [](RunConfig& c, const std::string&, const std::string& v) { c.scenario.band = parse_band(trim(v)); }},
      {"d2d", "strategy", [](const RunConfig& c) { return to_string(c.scenario.strategy); },
       [](RunConfig& c, const std::string&, const std::string& v) {
         c.scenario.strategy = parse_strategy(trim(v));
       }},
      D2D_NUM("d2d", "threshold_db", scenario.threshold_db),
      D2D_NUM("d2d", "admit_probability", scenario.admit_probability),
      D2D_INT("d2d", "fading_samples", scenario.fading_samples),
      D2D_NUM("d2d", "boundary_tolerance", scenario.boundary_tolerance_frac),
      // [sweep]
      {"sweep", "axis", [](const RunConfig& c) { return to_string(c.sweep.axis); },
       [](RunConfig& c, const std::string&, const std::string& v) { c.sweep.axis = parse_axis(lower(trim(v))); }},
      {"sweep", "grid",
       [](const RunConfig& c) { return join<double>(c.sweep.grid, [](const double& v) { return fmt(v); }); },
       [](RunConfig& c, const std::string& w, const std::string& v) {
         c.sweep.grid.clear();
         for (const auto& item : split_list(v))
           c.sweep.grid.push_back(to_double(w, item));
       }},
      {"sweep", "strategies",
       [](const RunConfig& c) {
         return join<Strategy>(c.sweep.strategies, [](const Strategy& s) { return to_string(s); });
       },
       [](RunConfig& c, const std::string& w, const std::string& v) {
         c.sweep.strategies.clear();
         for (const auto& item : split_list(v))
           c.sweep.strategies.push_back(parse_strategy(item));
         if (c.sweep.strategies.empty())
           throw ConfigError(w, "must list at least one strategy");
       }},
      {"sweep", "bands",
       [](const RunConfig& c) { return join<Band>(c.sweep.bands, [](const Band& b) { return to_string(b); }); },
       [](RunConfig& c, const std::string& w, const std::string& v) {
         c.sweep.bands.clear();
         for (const auto& item : split_list(v))
           c.sweep.bands.push_back(parse_band(item));
         if (c.sweep.bands.empty())
           throw ConfigError(w, "must list at least one band");
       }},
      D2D_INT("sweep", "trials_per_point", sweep.trials_per_point),
      // [seed]
      {"seed", "master", [](const RunConfig& c) { return std::to_string(c.scenario.master_seed); },
       [](RunConfig& c, const std::string& w, const std::string& v) { c.scenario.master_seed = to_u64(w, v); }},
      D2D_INT("seed", "trials", scenario.trials),
  };
  return table;
}

#undef D2D_NUM
#undef D2D_INT
#undef D2D_BOOL

const Key* find_key(const std::string& section, const std::string& name)
{
  for (const Key& k : key_table())
    if (section == k.section && name == k.name)
      return &k;
  return nullptr;
}

void validate_sweep(const SweepSpec& s)
{
  if (s.trials_per_point < 0)
    throw ConfigError("sweep.trials_per_point", "must be non-negative");
  if (s.axis != SweepAxis::none && s.grid.empty())
    throw ConfigError("sweep.grid", "must not be empty");
}

} // namespace

RunConfig default_config()
{
  RunConfig c;
  refresh_noise(c);
  c.scenario.manhattan.building_fill_ratio = 0.1;
  c.scenario.pair_placement = PairPlacement::serving_cell;
  c.sweep.axis = SweepAxis::ue_density;
  c.sweep.grid = {0.0, 100.0, 200.0, 300.0, 400.0};
  return c;
}

std::optional<std::string> process_env(const std::string& name)
{
  if (const char* v = std::getenv(name.c_str()))
    return std::string(v);
  return std::nullopt;
}

void set_config_value(RunConfig& cfg, const std::string& section, const std::string& key,
                      const std::string& value)
{
  const Key* k = find_key(section, key);
  if (!k) {
    static const std::set<std::string> sections{"map", "bs", "channel", "d2d", "sweep", "seed"};
    if (!sections.count(section))
      throw ConfigError(section, "unknown section");
    throw ConfigError(section + "." + key, "unknown key");
  }
  k->set(cfg, section + "." + key, value);
}

RunConfig parse_config(const std::string& text, const EnvLookup& env)
{
  namespace pt = boost::property_tree;
  RunConfig cfg = default_config();

  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()), e.message());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError(section, "key outside of any section");
    for (const auto& [key, value] : body)
      set_config_value(cfg, section, key, value.data());
  }

  if (env)
    for (const Key& k : key_table()) {
      const std::string var = "D2DSIM_" + upper(k.section) + "_" + upper(k.name);
      if (auto v = env(var))
        k.set(cfg, std::string(k.section) + "." + k.name + " (" + var + ")", *v);
    }

  cfg.scenario.validate();
  validate_sweep(cfg.sweep);
  return cfg;
}

std::vector<std::pair<std::string, std::string>> resolved_entries(const RunConfig& cfg)
{
  std::vector<std::pair<std::string, std::string>> out;
  for (const Key& k : key_table())
    out.emplace_back(std::string(k.section) + "." + k.name, k.get(cfg));
  return out;
}

std::string dump_config(const RunConfig& cfg)
{
  std::string out;
  std::string current;
  for (const Key& k : key_table()) {
    if (current != k.section) {
      out += (current.empty() ? "[" : "\n[") + std::string(k.section) + "]\n";
      current = k.section;
    }
    out += std::string(k.name) + " = " + k.get(cfg) + "\n";
  }
  return out;
}

} // namespace d2d
