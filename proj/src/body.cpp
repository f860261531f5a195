#include "gip/body.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace gip {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dot_normal(const HullFacet& f, const UnitVector& x) { return dot(f.normal, x.coords()); }

// Orders directions counterclockwise around their mean (S^2 only).
void order_around(std::vector<UnitVector>& gens) {
  if (gens.size() < 3) return;
  std::vector<double> mean(3, 0.0);
  for (const auto& g : gens) {
    for (std::size_t k = 0; k < 3; ++k) mean[k] += g[k];
  }
  const auto [e1, e2] = tangent_frame(UnitVector(mean));
  std::vector<std::pair<double, std::size_t>> keyed;
  for (std::size_t s = 0; s < gens.size(); ++s) keyed.emplace_back(std::atan2(dot(gens[s], e2), dot(gens[s], e1)), s);
  std::sort(keyed.begin(), keyed.end());
  std::vector<UnitVector> out;
  for (const auto& [a, s] : keyed) out.push_back(gens[s]);
  gens = std::move(out);
}

}  // namespace

ConvexBodyRep::ConvexBodyRep(std::vector<UnitVector> directions, std::vector<double> radii)
    : directions_(std::move(directions)), radii_(std::move(radii)) {
  if (directions_.empty() || directions_.size() != radii_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "one radius per direction required");
  }
  std::vector<std::vector<double>> pts;
  for (std::size_t j = 0; j < size(); ++j) {
    require_same_dim(directions_[j], directions_.front());
    if (!(radii_[j] > 0.0) || !std::isfinite(radii_[j])) {
      throw Error(ErrorCode::InvalidArgument, "radii must be positive and finite");
    }
    pts.push_back(point(j));
  }
  hull_ = convex_hull(pts);
  inradius_ = kInf;
  for (const auto& f : hull_.facets) inradius_ = std::min(inradius_, f.offset);
  circumradius_ = *std::max_element(radii_.begin(), radii_.end());
  if (!(inradius_ > 1e-12 * circumradius_)) {
    throw Error(ErrorCode::InvalidArgument, "origin is not an interior point of the hull");
  }
}

std::vector<double> ConvexBodyRep::point(std::size_t j) const {
  std::vector<double> p(directions_.at(j).coords().begin(), directions_.at(j).coords().end());
  for (double& v : p) v *= radii_[j];
  return p;
}

std::vector<std::size_t> ConvexBodyRep::swallowed(double tol) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < size(); ++j) {
    if (radial_function(*this, directions_[j]) > radii_[j] * (1 + tol)) out.push_back(j);
  }
  return out;
}

ConvexBodyRep ConvexBodyRep::scaled(double t) const {
  std::vector<double> r = radii_;
  for (double& v : r) v *= t;
  return ConvexBodyRep(directions_, std::move(r));
}

ConvexBodyRep oliker_transform(const std::vector<UnitVector>& atoms, const std::vector<double>& psi) {
  std::vector<double> r;
  for (double v : psi) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "psi must be finite at every atom");
    r.push_back(std::exp(v));
  }
  return ConvexBodyRep(atoms, std::move(r));
}

std::vector<double> oliker_inverse(const ConvexBodyRep& body) {
  std::vector<double> psi;
  for (double r : body.radii()) psi.push_back(std::log(r));
  return psi;
}

double support_function(const ConvexBodyRep& body, const UnitVector& n) {
  double h = -kInf;
  for (std::size_t j = 0; j < body.size(); ++j) h = std::max(h, body.radii()[j] * dot(n, body.directions()[j]));
  return h;
}

double radial_function(const ConvexBodyRep& body, const UnitVector& x) {
  double rho = kInf;
  for (const auto& f : body.hull().facets) {
    const double d = dot_normal(f, x);
    if (d > 0.0) rho = std::min(rho, f.offset / d);
  }
  return rho;
}

double radial_by_ray(const ConvexBodyRep& body, const UnitVector& x) {
  const Hull& hull = body.hull();
  if (hull.ambient_dim == 2) {
    const auto& ext = hull.extreme;
    for (std::size_t e = 0; e < ext.size(); ++e) {
      const auto a = body.point(ext[e]);
      const auto b = body.point(ext[(e + 1) % ext.size()]);
      const double ax = a[0] * x[1] - a[1] * x[0];
      const double xb = x[0] * b[1] - x[1] * b[0];
      if (ax < 0.0 || xb < 0.0) continue;
      const double ex = b[0] - a[0], ey = b[1] - a[1];
      return (a[0] * ey - a[1] * ex) / (x[0] * ey - x[1] * ex);
    }
    return radial_function(body, x);
  }
  // Intersect with each facet plane and keep the hit inside its polygon.
  for (const auto& f : hull.facets) {
    const double d = dot_normal(f, x);
    if (d <= 0.0) continue;
    const double t = f.offset / d;
    std::vector<std::vector<double>> pts;
    for (std::size_t v : f.vertices) pts.push_back(body.point(v));
    bool inside = true;
    for (std::size_t s = 0; s < pts.size() && inside; ++s) {
      for (std::size_t u = s + 1; u < pts.size() && inside; ++u) {
        // Every edge of the polygon is a chord with all other points on one side.
        const auto& p = pts[s];
        const auto& q = pts[u];
        double side_ref = 0.0;
        bool is_edge = true;
        auto side = [&](const std::vector<double>& r) {
          const double e0 = q[0] - p[0], e1 = q[1] - p[1], e2 = q[2] - p[2];
          const double r0 = r[0] - p[0], r1 = r[1] - p[1], r2 = r[2] - p[2];
          return f.normal[0] * (e1 * r2 - e2 * r1) + f.normal[1] * (e2 * r0 - e0 * r2) +
                 f.normal[2] * (e0 * r1 - e1 * r0);
        };
        const double tol = 1e-12 * body.circumradius() * body.circumradius();
        for (std::size_t w = 0; w < pts.size() && is_edge; ++w) {
          if (w == s || w == u) continue;
          const double sd = side(pts[w]);
          if (std::abs(sd) <= tol) continue;
          if (side_ref == 0.0) side_ref = sd;
          if (sd * side_ref < 0.0) is_edge = false;
        }
        if (!is_edge || side_ref == 0.0) continue;
        const std::vector<double> hit{t * x[0], t * x[1], t * x[2]};
        if (side(hit) * side_ref < -tol) inside = false;
      }
    }
    if (inside) return t;
  }
  return radial_function(body, x);
}

ConvexBodyRep polar_body(const ConvexBodyRep& body) {
  std::vector<UnitVector> dirs;
  std::vector<double> radii;
  for (const auto& f : body.hull().facets) {
    dirs.emplace_back(f.normal);
    radii.push_back(1.0 / f.offset);
  }
  return ConvexBodyRep(std::move(dirs), std::move(radii));
}

std::vector<UnitVector> gauss_map(const ConvexBodyRep& body, const UnitVector& x) {
  const double rho = radial_function(body, x);
  std::vector<UnitVector> out;
  for (const auto& f : body.hull().facets) {
    const double gap = rho * dot_normal(f, x) - f.offset;
    if (std::abs(gap) <= 1e-9 * std::max(1.0, f.offset)) out.emplace_back(f.normal);
  }
  if (body.ambient_dim() == 3) order_around(out);
  return out;
}

PushforwardResult pushforward_map(const ConvexBodyRep& body, const UnitVector& n) {
  std::vector<double> v(body.size());
  for (std::size_t j = 0; j < body.size(); ++j) v[j] = body.radii()[j] * dot(n, body.directions()[j]);
  const double best = *std::max_element(v.begin(), v.end());
  PushforwardResult r;
  r.vertex = body.size();
  for (std::size_t j = 0; j < body.size(); ++j) {
    if (v[j] < best - kTieThreshold) continue;
    if (r.vertex == body.size()) {
      r.vertex = j;
    } else {
      r.tie = true;
    }
  }
  return r;
}

std::vector<std::vector<UnitVector>> normal_cones(const ConvexBodyRep& body) {
  const Hull& hull = body.hull();
  std::vector<std::vector<UnitVector>> cones(body.size());
  if (hull.ambient_dim == 2) {
    const std::size_t e = hull.extreme.size();
    for (std::size_t s = 0; s < e; ++s) {
      cones[hull.extreme[s]] = {UnitVector(hull.facets[(s + e - 1) % e].normal), UnitVector(hull.facets[s].normal)};
    }
    return cones;
  }
  for (std::size_t j : hull.extreme) {
    for (const auto& f : hull.facets) {
      if (std::find(f.vertices.begin(), f.vertices.end(), j) != f.vertices.end()) cones[j].emplace_back(f.normal);
    }
    order_around(cones[j]);
  }
  return cones;
}

double spherical_polygon_area(const std::vector<UnitVector>& v) {
  double area = 0.0;
  for (std::size_t s = 1; s + 1 < v.size(); ++s) {
    const auto& a = v[0];
    const auto& b = v[s];
    const auto& c = v[s + 1];
    const double triple = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) +
                          a[2] * (b[0] * c[1] - b[1] * c[0]);
    area += 2.0 * std::atan2(std::abs(triple), 1.0 + dot(a, b) + dot(b, c) + dot(c, a));
  }
  return area;
}

GaussImage gauss_image_measure(const ConvexBodyRep& body, const DensityMeasure& lambda, IntegrationMode mode,
                               std::size_t samples, std::uint64_t seed) {
  if (lambda.ambient_dim() != body.ambient_dim()) throw Error(ErrorCode::DimensionMismatch, "measure and body differ");
  GaussImage g;
  g.weights.assign(body.size(), 0.0);
  g.std_errors.assign(body.size(), 0.0);
  if (mode == IntegrationMode::Exact) {
    const bool circle = lambda.exact_on_circle();
    if (!circle && !lambda.exact_on_sphere2()) {
      throw Error(ErrorCode::InvalidArgument, "exact integration needs an exact family on S^1 or uniform S^2");
    }
    const auto cones = normal_cones(body);
    for (std::size_t j = 0; j < body.size(); ++j) {
      if (cones[j].empty()) continue;
      if (circle) {
        const double start = cones[j][0].angle();
        g.weights[j] = lambda.arc_mass({start, wrap_angle(cones[j][1].angle() - start)});
      } else {
        g.weights[j] = spherical_polygon_area(cones[j]) / sphere_area(3);
      }
    }
    g.exact = true;
    return g;
  }
  if (samples == 0) throw Error(ErrorCode::InvalidArgument, "sample count must be positive");
  std::vector<std::size_t> hits(body.size(), 0);
  auto rng = block_engine(seed, 0);
  for (std::size_t s = 0; s < samples; ++s) {
    const auto r = pushforward_map(body, lambda.sample(rng));
    ++hits[r.vertex];
    if (r.tie) ++g.ties;
  }
  const double n = static_cast<double>(samples);
  for (std::size_t j = 0; j < body.size(); ++j) {
    const double p = static_cast<double>(hits[j]) / n;
    g.weights[j] = p;
    g.std_errors[j] = std::sqrt(p * (1 - p) / n);
  }
  return g;
}

AngleBound angle_bound_check(const ConvexBodyRep& body, const std::vector<std::pair<UnitVector, UnitVector>>& pairs) {
  AngleBound a;
  a.epsilon = body.inradius() * (1 - 1e-6);
  a.epsilon_prime = a.epsilon / body.circumradius();
  a.min_inner = 1.0;
  for (const auto& [n, x] : pairs) a.min_inner = std::min(a.min_inner, dot(n, x));
  a.holds = a.min_inner > a.epsilon_prime;
  return a;
}

Disagreement compare_solutions(const ConvexBodyRep& k, const ConvexBodyRep& l, const DensityMeasure& lambda,
                               std::size_t samples, std::uint64_t seed) {
  if (k.size() != l.size() || k.ambient_dim() != l.ambient_dim()) {
    throw Error(ErrorCode::VertexSetMismatch, "bodies have different vertex counts");
  }
  // l_to_k[b]: index in K of the direction of vertex b of L.
  std::vector<std::size_t> l_to_k(l.size(), k.size());
  Disagreement d;
  d.radius_ratio.assign(k.size(), 0.0);
  for (std::size_t b = 0; b < l.size(); ++b) {
    for (std::size_t a = 0; a < k.size(); ++a) {
      const auto& u = l.directions()[b];
      const auto& w = k.directions()[a];
      bool same = true;
      for (std::size_t c = 0; c < u.ambient_dim() && same; ++c) same = std::abs(u[c] - w[c]) <= 1e-12;
      if (same) {
        l_to_k[b] = a;
        d.radius_ratio[a] = l.radii()[b] / k.radii()[a];
        break;
      }
    }
  }
  std::vector<std::size_t> seen = l_to_k;
  std::sort(seen.begin(), seen.end());
  if (seen.back() == k.size() || std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
    throw Error(ErrorCode::VertexSetMismatch, "bodies do not share their vertex directions");
  }
  auto rng = block_engine(seed, 0);
  for (std::size_t s = 0; s < samples; ++s) {
    const UnitVector n = lambda.sample(rng);
    const auto tk = pushforward_map(k, n);
    const auto tl = pushforward_map(l, n);
    if (tk.tie || tl.tie) {
      ++d.ties;
      continue;
    }
    if (l_to_k[tl.vertex] != tk.vertex) ++d.disagreements;
  }
  d.samples = samples;
  const double n = static_cast<double>(samples);
  d.mass = static_cast<double>(d.disagreements) / n;
  d.std_error = std::sqrt(d.mass * (1 - d.mass) / n);
  return d;
}

}  // namespace gip
