#include <cmath>
#include <string>

#include <json.hpp>

#include "d2dsim/env.hpp"
#include "d2dsim/errors.hpp"
#include "d2dsim/rng.hpp"

namespace d2d {

using nlohmann::json;

UrbanMap generate_manhattan_map(const ManhattanSpec& spec, std::uint64_t seed)
{
  if (!(spec.street_width_m > 0.0))
    throw ConfigError("map.street_width_m", "must be positive");
  if (!(spec.block_size_m > 0.0))
    throw ConfigError("map.block_size_m", "must be positive");
  if (spec.street_width_m >= spec.block_size_m)
    throw ConfigError("map.street_width_m", "street must be narrower than the block");
  if (!(spec.building_fill_ratio >= 0.0 && spec.building_fill_ratio <= 1.0))
    throw ConfigError("map.building_fill_ratio", "must lie in [0, 1]");
  if (!(spec.jitter_m >= 0.0 && 2.0 * spec.jitter_m < spec.block_size_m))
    throw ConfigError("map.jitter_m", "must lie in [0, block_size/2)");

  // Streets of width w alternate with blocks of size s, starting and ending
  // with a street; the used extent is centred in the bounds.
  const double pitch = spec.block_size_m + spec.street_width_m;
  const auto fit = [&](double extent) {
    const double n = std::floor((extent - spec.street_width_m) / pitch);
    return std::max(0, static_cast<int>(n));
  };
  const int nx = fit(spec.bounds.width_m);
  const int ny = fit(spec.bounds.height_m);
  const double ox = 0.5 * (spec.bounds.width_m - (nx * pitch + spec.street_width_m));
  const double oy = 0.5 * (spec.bounds.height_m - (ny * pitch + spec.street_width_m));

  SeedStream rng(seed, "manhattan");
  std::vector<Building> buildings;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double x0 = ox + spec.street_width_m + i * pitch;
      const double y0 = oy + spec.street_width_m + j * pitch;
      // Draw every variate in a fixed order so the layout of one block never
      // depends on whether another block was kept.
      const double keep = rng.uniform();
      double pull[4];
      for (double& p : pull)
        p = spec.jitter_m > 0.0 ? rng.uniform(0.0, spec.jitter_m) : 0.0;
      if (keep >= spec.building_fill_ratio)
        continue;
      const double xa = x0 + pull[0], xb = x0 + spec.block_size_m - pull[1];
      const double ya = y0 + pull[2], yb = y0 + spec.block_size_m - pull[3];
      buildings.push_back(Building{{{xa, ya}, {xb, ya}, {xb, yb}, {xa, yb}}, spec.building_height_m, {}});
    }
  }
  if (buildings.empty() && spec.min_one_building && nx > 0 && ny > 0 && spec.building_fill_ratio > 0.0) {
    const double x0 = ox + spec.street_width_m + (nx / 2) * pitch;
    const double y0 = oy + spec.street_width_m + (ny / 2) * pitch;
    buildings.push_back(Building{{{x0, y0},
                                  {x0 + spec.block_size_m, y0},
                                  {x0 + spec.block_size_m, y0 + spec.block_size_m},
                                  {x0, y0 + spec.block_size_m}},
                                 spec.building_height_m,
                                 {}});
  }
  return UrbanMap::create(spec.bounds, std::move(buildings), spec.default_wall_loss_db);
}

namespace {

double number_at(const json& j, const char* key, const std::string& where)
{
  auto it = j.find(key);
  if (it == j.end())
    throw MapValidationError(where, std::string("missing field '") + key + "'");
  if (!it->is_number())
    throw MapValidationError(where + "." + key, "expected a number");
  return it->get<double>();
}

} // namespace

UrbanMap load_map(std::string_view text)
{
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw MapValidationError("map file (byte " + std::to_string(e.byte) + ")", e.what());
  }
  if (!doc.is_object())
    throw MapValidationError("map file", "top level must be an object");

  auto bit = doc.find("bounds");
  if (bit == doc.end() || !bit->is_object())
    throw MapValidationError("bounds", "missing or not an object");
  const Bounds bounds{number_at(*bit, "width_m", "bounds"), number_at(*bit, "height_m", "bounds")};
  const double wall = number_at(doc, "default_wall_loss_db", "map file");

  std::vector<Building> buildings;
  if (auto it = doc.find("buildings"); it != doc.end()) {
    if (!it->is_array())
      throw MapValidationError("buildings", "expected an array");
    for (std::size_t k = 0; k < it->size(); ++k) {
      const std::string where = "buildings[" + std::to_string(k) + "]";
      const json& jb = (*it)[k];
      if (!jb.is_object())
        throw MapValidationError(where, "expected an object");
      auto vit = jb.find("vertices");
      if (vit == jb.end() || !vit->is_array())
        throw MapValidationError(where, "missing 'vertices' array");
      Building b;
      for (std::size_t v = 0; v < vit->size(); ++v) {
        const json& jv = (*vit)[v];
        if (!jv.is_array() || jv.size() != 2 || !jv[0].is_number() || !jv[1].is_number())
          throw MapValidationError(where + ".vertices[" + std::to_string(v) + "]",
                                   "expected [x, y]");
        b.footprint.push_back({jv[0].get<double>(), jv[1].get<double>()});
      }
      if (jb.contains("height_m"))
        b.height_m = number_at(jb, "height_m", where);
      if (jb.contains("wall_loss_db"))
        b.wall_loss_db = number_at(jb, "wall_loss_db", where);
      buildings.push_back(std::move(b));
    }
  }
  return UrbanMap::create(bounds, std::move(buildings), wall);
}

std::string serialize_map(const UrbanMap& map)
{
  json doc;
  doc["bounds"] = {{"width_m", map.bounds().width_m}, {"height_m", map.bounds().height_m}};
  doc["default_wall_loss_db"] = map.default_wall_loss_db();
  json arr = json::array();
  for (const auto& b : map.buildings()) {
    json jb;
    json verts = json::array();
    for (const Point& p : b.footprint)
      verts.push_back({p.x, p.y});
    jb["vertices"] = std::move(verts);
    jb["height_m"] = b.height_m;
    if (b.wall_loss_db)
      jb["wall_loss_db"] = *b.wall_loss_db;
    arr.push_back(std::move(jb));
  }
  doc["buildings"] = std::move(arr);
  return doc.dump(2) + "\n";
}

} // namespace d2d
