#pragma once

#include "d2dsim/sim.hpp"

namespace d2d::detail {

int nearest_site(Point p, const std::vector<Point>& sites);
bool usable_ue_position(Point p, const UrbanMap& map);
/// Uniform over the part of `cell`'s Voronoi region within `radius_m` of its
/// site, on UE-usable ground.
Point sample_in_cell(const Deployment& dep, int cell, double radius_m, const UrbanMap& map, bool within_map,
                     SeedStream& rng);

} // namespace d2d::detail
