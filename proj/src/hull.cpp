#include "gip/hull.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>
#include <utility>

#include "gip/error.hpp"

namespace gip {

namespace {

double scale_of(const std::vector<std::vector<double>>& points) {
  double s = 0.0;
  for (const auto& p : points) {
    for (double v : p) s = std::max(s, std::abs(v));
  }
  return s;
}

double cross2(const std::vector<double>& o, const std::vector<double>& a, const std::vector<double>& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

Hull hull2(const std::vector<std::vector<double>>& pts) {
  const double eps = 1e-13 * scale_of(pts) * scale_of(pts);
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pts[a][0] != pts[b][0] ? pts[a][0] < pts[b][0] : pts[a][1] < pts[b][1];
  });
  std::vector<std::size_t> chain(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t idx : order) {
    while (k >= 2 && cross2(pts[chain[k - 2]], pts[chain[k - 1]], pts[idx]) <= eps) --k;
    chain[k++] = idx;
  }
  for (std::size_t s = order.size() - 1, lower = k + 1; s-- > 0;) {
    const std::size_t idx = order[s];
    while (k >= lower && cross2(pts[chain[k - 2]], pts[chain[k - 1]], pts[idx]) <= eps) --k;
    chain[k++] = idx;
  }
  chain.resize(k - 1);
  if (chain.size() < 3) throw Error(ErrorCode::InvalidArgument, "planar hull has no interior");
  Hull h;
  h.ambient_dim = 2;
  h.extreme = chain;
  for (std::size_t e = 0; e < chain.size(); ++e) {
    const auto& a = pts[chain[e]];
    const auto& b = pts[chain[(e + 1) % chain.size()]];
    const double dx = b[0] - a[0], dy = b[1] - a[1];
    const double len = std::hypot(dx, dy);
    HullFacet f;
    f.vertices = {chain[e], chain[(e + 1) % chain.size()]};
    f.normal = {dy / len, -dx / len};
    f.offset = f.normal[0] * a[0] + f.normal[1] * a[1];
    h.facets.push_back(std::move(f));
  }
  return h;
}

struct Triangle {
  std::array<std::size_t, 3> v;
  Eigen::Vector3d normal;
  double offset;
  bool alive = true;
};

Hull hull3(const std::vector<std::vector<double>>& raw) {
  std::vector<Eigen::Vector3d> p;
  for (const auto& q : raw) p.emplace_back(q[0], q[1], q[2]);
  const double scale = scale_of(raw);
  const double eps = 1e-12 * scale;
  const std::size_t n = p.size();
  if (n < 4) throw Error(ErrorCode::InvalidArgument, "spatial hull needs four points");

  // Initial tetrahedron from extremal choices.
  std::size_t i0 = 0, i1 = 0, i2 = 0, i3 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if ((p[i] - p[i0]).norm() > (p[i1] - p[i0]).norm()) i1 = i;
  }
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (p[i1] - p[i0]).cross(p[i] - p[i0]).norm();
    if (d > best) best = d, i2 = i;
  }
  best = 0.0;
  const Eigen::Vector3d base_normal = (p[i1] - p[i0]).cross(p[i2] - p[i0]);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::abs(base_normal.dot(p[i] - p[i0]));
    if (d > best) best = d, i3 = i;
  }
  if (base_normal.norm() <= eps * scale || best <= eps * base_normal.norm()) {
    throw Error(ErrorCode::InvalidArgument, "spatial hull has no interior");
  }
  const Eigen::Vector3d inside = (p[i0] + p[i1] + p[i2] + p[i3]) / 4.0;

  std::vector<Triangle> tris;
  auto add = [&](std::size_t a, std::size_t b, std::size_t c) {
    Eigen::Vector3d nrm = (p[b] - p[a]).cross(p[c] - p[a]);
    if (nrm.dot(p[a] - inside) < 0) {
      std::swap(b, c);
      nrm = -nrm;
    }
    nrm.normalize();
    tris.push_back({{a, b, c}, nrm, nrm.dot(p[a])});
  };
  add(i0, i1, i2);
  add(i0, i1, i3);
  add(i0, i2, i3);
  add(i1, i2, i3);

  for (std::size_t q = 0; q < n; ++q) {
    if (q == i0 || q == i1 || q == i2 || q == i3) continue;
    std::vector<std::size_t> visible;
    for (std::size_t t = 0; t < tris.size(); ++t) {
      if (tris[t].alive && tris[t].normal.dot(p[q]) - tris[t].offset > eps) visible.push_back(t);
    }
    if (visible.empty()) continue;
    std::set<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t t : visible) {
      for (int e = 0; e < 3; ++e) edges.emplace(tris[t].v[e], tris[t].v[(e + 1) % 3]);
    }
    for (std::size_t t : visible) tris[t].alive = false;
    for (const auto& [a, b] : edges) {
      if (edges.count({b, a}) == 0) {
        Eigen::Vector3d nrm = (p[b] - p[a]).cross(p[q] - p[a]).normalized();
        tris.push_back({{a, b, q}, nrm, nrm.dot(p[a])});
      }
    }
  }

  // Merge coplanar triangles into facets.
  Hull h;
  h.ambient_dim = 3;
  std::set<std::size_t> extreme;
  for (const auto& t : tris) {
    if (!t.alive) continue;
    for (std::size_t v : t.v) extreme.insert(v);
    auto same = std::find_if(h.facets.begin(), h.facets.end(), [&](const HullFacet& f) {
      const Eigen::Vector3d fn(f.normal[0], f.normal[1], f.normal[2]);
      return fn.dot(t.normal) > 1 - 1e-12 && std::abs(f.offset - t.offset) <= eps;
    });
    if (same == h.facets.end()) {
      HullFacet f;
      f.normal = {t.normal[0], t.normal[1], t.normal[2]};
      f.offset = t.offset;
      h.facets.push_back(std::move(f));
      same = h.facets.end() - 1;
    }
    for (std::size_t v : t.v) {
      if (std::find(same->vertices.begin(), same->vertices.end(), v) == same->vertices.end()) {
        same->vertices.push_back(v);
      }
    }
  }
  // Triangulation vertices inside a facet or on an edge are not extreme.
  for (std::size_t v : extreme) {
    const auto on = std::count_if(h.facets.begin(), h.facets.end(), [&](const HullFacet& f) {
      return std::find(f.vertices.begin(), f.vertices.end(), v) != f.vertices.end();
    });
    if (on >= 3) h.extreme.push_back(v);
  }
  return h;
}

}  // namespace

Hull convex_hull(const std::vector<std::vector<double>>& points) {
  if (points.empty()) throw Error(ErrorCode::InvalidArgument, "no points");
  const std::size_t d = points.front().size();
  for (const auto& q : points) {
    if (q.size() != d) throw Error(ErrorCode::DimensionMismatch, "points of different dimensions");
  }
  if (d == 2) return hull2(points);
  if (d == 3) return hull3(points);
  throw Error(ErrorCode::InvalidArgument, "hulls are available in dimensions 2 and 3");
}

}  // namespace gip
