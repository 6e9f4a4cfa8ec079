#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace d2d {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

double distance(Point a, Point b) noexcept;

/// Axis-aligned rectangle anchored at the origin (lower-left corner).
struct Bounds {
  double width_m = 0.0;
  double height_m = 0.0;

  bool contains(Point p) const noexcept
  {
    return p.x >= 0.0 && p.y >= 0.0 && p.x <= width_m && p.y <= height_m;
  }
  double area() const noexcept { return width_m * height_m; }
  Point center() const noexcept { return {0.5 * width_m, 0.5 * height_m}; }

  friend bool operator==(const Bounds&, const Bounds&) = default;
};

struct Building {
  std::vector<Point> footprint;
  double height_m = 0.0;
  std::optional<double> wall_loss_db;

  double area() const noexcept;

  friend bool operator==(const Building&, const Building&) = default;
};

/// Immutable city plan. Build through `UrbanMap::create` (validates) or the
/// loaders; the query functions below only ever read it.
class UrbanMap {
public:
  UrbanMap() = default;

  /// Validates every invariant; throws MapValidationError naming the offender.
  static UrbanMap create(Bounds bounds, std::vector<Building> buildings, double default_wall_loss_db);

  const Bounds& bounds() const noexcept { return bounds_; }
  const std::vector<Building>& buildings() const noexcept { return buildings_; }
  double default_wall_loss_db() const noexcept { return default_wall_loss_db_; }
  double wall_loss_of(std::size_t building) const noexcept;

  /// Same geometry, different default wall loss (per-building overrides kept).
  UrbanMap with_default_wall_loss(double db) const;

  double outdoor_area() const noexcept;

  friend bool operator==(const UrbanMap& a, const UrbanMap& b)
  {
    return a.bounds_ == b.bounds_ && a.buildings_ == b.buildings_ &&
           a.default_wall_loss_db_ == b.default_wall_loss_db_;
  }

  struct Box {
    double xmin, ymin, xmax, ymax;
    bool is_footprint; // the footprint is exactly this axis-aligned rectangle
  };
  /// Footprint bounding boxes, parallel to buildings().
  const std::vector<Box>& boxes() const noexcept { return boxes_; }

private:
  Bounds bounds_;
  std::vector<Building> buildings_;
  std::vector<Box> boxes_;
  double default_wall_loss_db_ = 0.0;
};

struct ManhattanSpec {
  Bounds bounds{920.0, 550.0};
  double block_size_m = 80.0;
  double street_width_m = 20.0;
  /// Probability that a block slot holds a building.
  double building_fill_ratio = 1.0;
  /// Each facade is pulled back into its block by up to this many meters.
  double jitter_m = 0.0;
  double default_wall_loss_db = 10.0;
  double building_height_m = 20.0;
  /// Keep one building even when every fill draw comes up empty.
  bool min_one_building = true;
};

UrbanMap generate_manhattan_map(const ManhattanSpec& spec, std::uint64_t seed);

/// JSON map file: {bounds:{width_m,height_m}, default_wall_loss_db,
/// buildings:[{vertices:[[x,y],...], height_m?, wall_loss_db?}]}
UrbanMap load_map(std::string_view text);
std::string serialize_map(const UrbanMap& map);

struct WallCrossings {
  int count = 0;
  /// One entry per wall crossed, in the order met from `a` to `b`.
  std::vector<double> losses_db;
  double total_loss_db() const noexcept;
};

/// Counts transitions of the open segment (a,b) across building outlines.
/// Touching a wall or vertex without entering the interior is not a crossing.
WallCrossings wall_crossings(Point a, Point b, const UrbanMap& map);

/// Count-only fast path of wall_crossings, with the summed loss.
struct CrossingSummary {
  int count = 0;
  double loss_db = 0.0;
};
CrossingSummary crossing_summary(Point a, Point b, const UrbanMap& map);

/// True iff `p` lies in no closed building footprint (walls count as indoor).
bool is_outdoor(Point p, const UrbanMap& map);

std::vector<Point> sample_outdoor_points(const UrbanMap& map, std::size_t count, std::uint64_t seed);

/// Geometry helpers shared with tests.
namespace geom {
bool point_on_segment(Point p, Point a, Point b) noexcept;
/// Closed-footprint containment (boundary counts as inside).
bool in_polygon_closed(Point p, const std::vector<Point>& poly) noexcept;
/// Strict interior containment (boundary counts as outside).
bool in_polygon_open(Point p, const std::vector<Point>& poly) noexcept;
double signed_area(const std::vector<Point>& poly) noexcept;
bool is_simple(const std::vector<Point>& poly) noexcept;
} // namespace geom

} // namespace d2d
