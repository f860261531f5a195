#pragma once

#include <cstddef>
#include <vector>

namespace gip {

struct HullFacet {
  /// Indices of the input points on the facet; counterclockwise seen from
  /// outside in the plane, unordered in space.
  std::vector<std::size_t> vertices;
  /// Outward unit normal.
  std::vector<double> normal;
  /// normal . p for every point p of the facet.
  double offset = 0.0;
};

struct Hull {
  std::size_t ambient_dim = 0;
  /// Extreme points, counterclockwise in the plane, ascending in space.
  std::vector<std::size_t> extreme;
  /// Coplanar triangles are merged, so every facet has a distinct normal.
  std::vector<HullFacet> facets;
};

/// Convex hull of points in R^2 (monotone chain) or R^3 (incremental).
/// Points on the boundary but not extreme are dropped. Throws
/// InvalidArgument for other dimensions and for hulls without interior.
Hull convex_hull(const std::vector<std::vector<double>>& points);

}  // namespace gip
