#include "d2dsim/env.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "d2dsim/errors.hpp"
#include "d2dsim/rng.hpp"

namespace d2d {

namespace {

constexpr double kEps = 1e-9;

double cross(Point o, Point a, Point b) noexcept
{
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

int sign(double v) noexcept
{
  return (v > kEps) - (v < -kEps);
}

bool segments_touch(Point p1, Point p2, Point q1, Point q2) noexcept
{
  const int d1 = sign(cross(q1, q2, p1));
  const int d2 = sign(cross(q1, q2, p2));
  const int d3 = sign(cross(p1, p2, q1));
  const int d4 = sign(cross(p1, p2, q2));
  if (d1 * d2 < 0 && d3 * d4 < 0)
    return true;
  return (d1 == 0 && geom::point_on_segment(p1, q1, q2)) ||
         (d2 == 0 && geom::point_on_segment(p2, q1, q2)) ||
         (d3 == 0 && geom::point_on_segment(q1, p1, p2)) ||
         (d4 == 0 && geom::point_on_segment(q2, p1, p2));
}

// Liang-Barsky clip of segment a->b against a box; true if any part is inside.
bool segment_hits_box(Point a, Point b, double xmin, double ymin, double xmax, double ymax, double& t0,
                      double& t1) noexcept
{
  t0 = 0.0;
  t1 = 1.0;
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {a.x - xmin, xmax - a.x, a.y - ymin, ymax - a.y};
  for (int i = 0; i < 4; ++i) {
    if (std::abs(p[i]) < 1e-15) {
      if (q[i] < -kEps)
        return false;
      continue;
    }
    const double r = q[i] / p[i];
    if (p[i] < 0.0)
      t0 = std::max(t0, r);
    else
      t1 = std::min(t1, r);
    if (t0 > t1 + kEps)
      return false;
  }
  t1 = std::max(t0, t1);
  return true;
}

// Parameters along a->b where the segment meets the polygon outline.
void outline_hits(Point a, Point b, const std::vector<Point>& poly, std::vector<double>& ts)
{
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point q1 = poly[i], q2 = poly[(i + 1) % n];
    const double ex = q2.x - q1.x, ey = q2.y - q1.y;
    const double denom = dx * ey - dy * ex;
    if (std::abs(denom) > 1e-12 * std::sqrt(len2 * (ex * ex + ey * ey))) {
      const double t = ((q1.x - a.x) * ey - (q1.y - a.y) * ex) / denom;
      const double s = ((q1.x - a.x) * dy - (q1.y - a.y) * dx) / denom;
      if (t >= -kEps && t <= 1.0 + kEps && s >= -kEps && s <= 1.0 + kEps)
        ts.push_back(std::clamp(t, 0.0, 1.0));
    } else if (std::abs(cross(a, b, q1)) <= kEps * std::sqrt(len2) + kEps) {
      // Collinear: the overlap ends are the only events.
      for (Point q : {q1, q2}) {
        const double t = ((q.x - a.x) * dx + (q.y - a.y) * dy) / len2;
        if (t >= -kEps && t <= 1.0 + kEps)
          ts.push_back(std::clamp(t, 0.0, 1.0));
      }
    }
  }
}

struct Transition {
  double t;
  double loss_db;
};

template <typename Sink>
void for_each_transition(Point a, Point b, const UrbanMap& map, Sink&& sink)
{
  if (a == b)
    return;
  const double sx0 = std::min(a.x, b.x), sx1 = std::max(a.x, b.x);
  const double sy0 = std::min(a.y, b.y), sy1 = std::max(a.y, b.y);
  std::vector<double> ts;
  const auto& buildings = map.buildings();
  for (std::size_t k = 0; k < buildings.size(); ++k) {
    const auto& poly = buildings[k].footprint;
    const auto [xmin, ymin, xmax, ymax, rect] = map.boxes()[k];
    if (xmax < sx0 - kEps || xmin > sx1 + kEps || ymax < sy0 - kEps || ymin > sy1 + kEps)
      continue;
    double t_in = 0.0, t_out = 1.0;
    if (!segment_hits_box(a, b, xmin, ymin, xmax, ymax, t_in, t_out))
      continue;

    if (rect) {
      // The segment meets a convex box in one parameter interval; it counts
      // only if that interval reaches the open interior.
      if (t_out - t_in < 1e-12)
        continue;
      const double tm = 0.5 * (t_in + t_out);
      const Point m{a.x + tm * (b.x - a.x), a.y + tm * (b.y - a.y)};
      if (!(m.x > xmin + kEps && m.x < xmax - kEps && m.y > ymin + kEps && m.y < ymax - kEps))
        continue;
      if (t_in > 1e-12)
        sink(Transition{t_in, map.wall_loss_of(k)});
      if (t_out < 1.0 - 1e-12)
        sink(Transition{t_out, map.wall_loss_of(k)});
      continue;
    }

    ts.clear();
    ts.push_back(0.0);
    ts.push_back(1.0);
    outline_hits(a, b, poly, ts);
    std::sort(ts.begin(), ts.end());

    // Classify the interior of each sub-interval; grazing contacts leave the
    // classification unchanged on both sides and so never count.
    int prev_state = -1;
    double prev_end = 0.0;
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
      if (ts[i + 1] - ts[i] < 1e-12)
        continue;
      const double tm = 0.5 * (ts[i] + ts[i + 1]);
      const Point m{a.x + tm * (b.x - a.x), a.y + tm * (b.y - a.y)};
      const int state = geom::in_polygon_open(m, poly) ? 1 : 0;
      if (prev_state >= 0 && state != prev_state)
        sink(Transition{prev_end, map.wall_loss_of(k)});
      prev_state = state;
      prev_end = ts[i + 1];
    }
  }
}

} // namespace

double distance(Point a, Point b) noexcept
{
  return std::hypot(a.x - b.x, a.y - b.y);
}

double Building::area() const noexcept
{
  return std::abs(geom::signed_area(footprint));
}

namespace geom {

bool point_on_segment(Point p, Point a, Point b) noexcept
{
  const double len = distance(a, b);
  if (std::abs(cross(a, b, p)) > kEps * std::max(1.0, len))
    return false;
  return p.x >= std::min(a.x, b.x) - kEps && p.x <= std::max(a.x, b.x) + kEps &&
         p.y >= std::min(a.y, b.y) - kEps && p.y <= std::max(a.y, b.y) + kEps;
}

namespace {
bool on_outline(Point p, const std::vector<Point>& poly) noexcept
{
  for (std::size_t i = 0, n = poly.size(); i < n; ++i)
    if (point_on_segment(p, poly[i], poly[(i + 1) % n]))
      return true;
  return false;
}

bool crossing_number_inside(Point p, const std::vector<Point>& poly) noexcept
{
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Point a = poly[i], b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x)
        inside = !inside;
    }
  }
  return inside;
}
} // namespace

bool in_polygon_closed(Point p, const std::vector<Point>& poly) noexcept
{
  return on_outline(p, poly) || crossing_number_inside(p, poly);
}

bool in_polygon_open(Point p, const std::vector<Point>& poly) noexcept
{
  return !on_outline(p, poly) && crossing_number_inside(p, poly);
}

double signed_area(const std::vector<Point>& poly) noexcept
{
  double s = 0.0;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    const Point a = poly[i], b = poly[(i + 1) % n];
    s += a.x * b.y - b.x * a.y;
  }
  return 0.5 * s;
}

bool is_simple(const std::vector<Point>& poly) noexcept
{
  const std::size_t n = poly.size();
  if (n < 3)
    return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point a1 = poly[i], a2 = poly[(i + 1) % n];
    if (a1 == a2)
      return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      const Point b1 = poly[j], b2 = poly[(j + 1) % n];
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) {
        // Neighbouring edges share one vertex; they must not fold back.
        const Point shared = (j == i + 1) ? a2 : a1;
        const Point other_a = (j == i + 1) ? a1 : a2;
        const Point other_b = (j == i + 1) ? b2 : b1;
        if (sign(cross(shared, other_a, other_b)) == 0) {
          const double dot = (other_a.x - shared.x) * (other_b.x - shared.x) +
                             (other_a.y - shared.y) * (other_b.y - shared.y);
          if (dot > 0.0)
            return false;
        }
        continue;
      }
      if (segments_touch(a1, a2, b1, b2))
        return false;
    }
  }
  return true;
}

} // namespace geom

UrbanMap UrbanMap::create(Bounds bounds, std::vector<Building> buildings, double default_wall_loss_db)
{
  if (!std::isfinite(bounds.width_m) || !std::isfinite(bounds.height_m) || bounds.width_m <= 0.0 ||
      bounds.height_m <= 0.0)
    throw MapValidationError("bounds", "width_m and height_m must be positive");
  if (!(default_wall_loss_db >= 0.0 && default_wall_loss_db <= 60.0))
    throw MapValidationError("default_wall_loss_db", "must lie in [0, 60] dB");

  for (std::size_t k = 0; k < buildings.size(); ++k) {
    const std::string where = "buildings[" + std::to_string(k) + "]";
    auto& b = buildings[k];
    if (b.footprint.size() >= 2 && b.footprint.front() == b.footprint.back())
      b.footprint.pop_back();
    if (b.footprint.size() < 3)
      throw MapValidationError(where, "polygon needs at least 3 vertices");
    for (const Point& v : b.footprint) {
      if (!std::isfinite(v.x) || !std::isfinite(v.y))
        throw MapValidationError(where, "non-finite vertex");
      if (!bounds.contains(v))
        throw MapValidationError(where, "vertex outside map bounds");
    }
    if (!geom::is_simple(b.footprint))
      throw MapValidationError(where, "polygon is not simple (self-intersecting)");
    if (b.area() <= 0.0)
      throw MapValidationError(where, "polygon has zero area");
    if (b.wall_loss_db && !(*b.wall_loss_db >= 0.0 && *b.wall_loss_db <= 60.0))
      throw MapValidationError(where, "wall_loss_db must lie in [0, 60] dB");
  }

  UrbanMap m;
  m.boxes_.reserve(buildings.size());
  for (const auto& b : buildings) {
    Box box{b.footprint[0].x, b.footprint[0].y, b.footprint[0].x, b.footprint[0].y, false};
    for (const Point& v : b.footprint) {
      box.xmin = std::min(box.xmin, v.x);
      box.ymin = std::min(box.ymin, v.y);
      box.xmax = std::max(box.xmax, v.x);
      box.ymax = std::max(box.ymax, v.y);
    }
    if (b.footprint.size() == 4) {
      bool axis_aligned = true;
      for (std::size_t i = 0; i < 4; ++i) {
        const Point p = b.footprint[i], q = b.footprint[(i + 1) % 4];
        axis_aligned = axis_aligned && ((p.x == q.x) != (p.y == q.y));
      }
      box.is_footprint = axis_aligned;
    }
    m.boxes_.push_back(box);
  }
  m.bounds_ = bounds;
  m.buildings_ = std::move(buildings);
  m.default_wall_loss_db_ = default_wall_loss_db;
  return m;
}

double UrbanMap::wall_loss_of(std::size_t building) const noexcept
{
  const auto& o = buildings_[building].wall_loss_db;
  return o ? *o : default_wall_loss_db_;
}

UrbanMap UrbanMap::with_default_wall_loss(double db) const
{
  return create(bounds_, buildings_, db);
}

double UrbanMap::outdoor_area() const noexcept
{
  double covered = 0.0;
  for (const auto& b : buildings_)
    covered += b.area();
  return bounds_.area() - covered;
}

double WallCrossings::total_loss_db() const noexcept
{
  double s = 0.0;
  for (double l : losses_db)
    s += l;
  return s;
}

WallCrossings wall_crossings(Point a, Point b, const UrbanMap& map)
{
  std::vector<Transition> hits;
  for_each_transition(a, b, map, [&](Transition t) { hits.push_back(t); });
  std::stable_sort(hits.begin(), hits.end(),
                   [](const Transition& l, const Transition& r) { return l.t < r.t; });
  WallCrossings out;
  out.count = static_cast<int>(hits.size());
  out.losses_db.reserve(hits.size());
  for (const auto& h : hits)
    out.losses_db.push_back(h.loss_db);
  return out;
}

CrossingSummary crossing_summary(Point a, Point b, const UrbanMap& map)
{
  CrossingSummary s;
  for_each_transition(a, b, map, [&](Transition t) {
    ++s.count;
    s.loss_db += t.loss_db;
  });
  return s;
}

bool is_outdoor(Point p, const UrbanMap& map)
{
  for (const auto& b : map.buildings())
    if (geom::in_polygon_closed(p, b.footprint))
      return false;
  return true;
}

std::vector<Point> sample_outdoor_points(const UrbanMap& map, std::size_t count, std::uint64_t seed)
{
  std::vector<Point> out;
  out.reserve(count);
  SeedStream rng(seed, "outdoor-points");
  const auto& bb = map.bounds();
  const std::size_t budget = std::max<std::size_t>(10000, 200 * count);
  std::size_t attempts = 0;
  while (out.size() < count) {
    if (++attempts > budget)
      throw SamplingError("outdoor sampling exceeded " + std::to_string(budget) +
                          " attempts; outdoor area fraction is too small");
    const Point p{rng.uniform(0.0, bb.width_m), rng.uniform(0.0, bb.height_m)};
    if (is_outdoor(p, map))
      out.push_back(p);
  }
  return out;
}

} // namespace d2d
