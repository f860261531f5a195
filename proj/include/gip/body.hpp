#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "gip/hull.hpp"
#include "gip/measure.hpp"

namespace gip {

/// Polytope conv{r_j w_j} stored by vertex directions and radii. The hull
/// is built on construction for S^1 and S^2.
class ConvexBodyRep {
 public:
  /// Throws InvalidArgument unless radii are positive and finite and the
  /// origin is an interior point.
  ConvexBodyRep(std::vector<UnitVector> directions, std::vector<double> radii);

  std::size_t size() const noexcept { return directions_.size(); }
  std::size_t ambient_dim() const { return directions_.front().ambient_dim(); }
  const std::vector<UnitVector>& directions() const noexcept { return directions_; }
  const std::vector<double>& radii() const noexcept { return radii_; }
  std::vector<double> point(std::size_t j) const;
  const Hull& hull() const { return hull_; }

  /// Distance from the origin to the boundary.
  double inradius() const noexcept { return inradius_; }
  double circumradius() const noexcept { return circumradius_; }

  /// Indices j with rho(w_j) < r_j - tol * r_j, i.e. intended vertices that
  /// are not on the boundary.
  std::vector<std::size_t> swallowed(double tol = 1e-9) const;

  ConvexBodyRep scaled(double t) const;

 private:
  std::vector<UnitVector> directions_;
  std::vector<double> radii_;
  Hull hull_;
  double inradius_ = 0.0;
  double circumradius_ = 0.0;
};

/// Radii r_j = exp(psi_j).
ConvexBodyRep oliker_transform(const std::vector<UnitVector>& atoms, const std::vector<double>& psi);
/// psi_j = ln r_j.
std::vector<double> oliker_inverse(const ConvexBodyRep& body);

/// h(n) = max_j r_j <n, w_j>.
double support_function(const ConvexBodyRep& body, const UnitVector& n);
/// rho(x) = min over facets with <x, n_F> > 0 of offset_F / <x, n_F>.
double radial_function(const ConvexBodyRep& body, const UnitVector& x);
/// rho(x) as the distance to the point where the ray through x leaves the hull.
double radial_by_ray(const ConvexBodyRep& body, const UnitVector& x);

/// Vertices n_F / offset_F, one per facet.
ConvexBodyRep polar_body(const ConvexBodyRep& body);

/// Extreme unit normals of the normal cone at the boundary point rho(x) x.
std::vector<UnitVector> gauss_map(const ConvexBodyRep& body, const UnitVector& x);

struct PushforwardResult {
  std::size_t vertex = 0;
  bool tie = false;
};

constexpr double kTieThreshold = 1e-12;

/// argmax_j r_j <n, w_j>; near-ties go to the smallest index and are flagged.
PushforwardResult pushforward_map(const ConvexBodyRep& body, const UnitVector& n);

enum class IntegrationMode { Exact, MonteCarlo };

struct GaussImage {
  std::vector<double> weights;
  /// Zero in exact mode.
  std::vector<double> std_errors;
  bool exact = false;
  /// Monte Carlo samples whose argmax was a tie.
  std::size_t ties = 0;
};

/// lambda(normal cone of vertex j) for every direction j. Exact mode needs an
/// exact family on S^1 or the uniform density on S^2 and throws
/// InvalidArgument otherwise.
GaussImage gauss_image_measure(const ConvexBodyRep& body, const DensityMeasure& lambda, IntegrationMode mode,
                               std::size_t samples = 1'000'000, std::uint64_t seed = kDefaultSeed);

/// Normal cone of every direction j as unit generators, ordered around the
/// cone on S^2; empty for directions that are not extreme.
std::vector<std::vector<UnitVector>> normal_cones(const ConvexBodyRep& body);

/// Area of the convex spherical polygon with ordered vertices.
double spherical_polygon_area(const std::vector<UnitVector>& vertices);

struct AngleBound {
  double epsilon = 0.0;
  double epsilon_prime = 0.0;
  double min_inner = 0.0;
  bool holds = false;
};

/// epsilon = inradius (1 - 1e-6), epsilon' = epsilon / max rho, and whether
/// <n, x> > epsilon' on every pair.
AngleBound angle_bound_check(const ConvexBodyRep& body, const std::vector<std::pair<UnitVector, UnitVector>>& pairs);

struct Disagreement {
  double mass = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  std::size_t disagreements = 0;
  std::size_t ties = 0;
  /// r_L / r_K per direction of K.
  std::vector<double> radius_ratio;
};

/// Monte Carlo estimate of lambda{n : T_K(n) != T_L(n)}, tie samples
/// excluded. Vertices are identified by direction; throws VertexSetMismatch
/// when the direction sets differ.
Disagreement compare_solutions(const ConvexBodyRep& k, const ConvexBodyRep& l, const DensityMeasure& lambda,
                               std::size_t samples = 1'000'000, std::uint64_t seed = kDefaultSeed);

}  // namespace gip
