#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "gip/error.hpp"

namespace gip {

/// A point of the unit sphere S^m stored in ambient coordinates R^{m+1}.
class UnitVector {
 public:
  UnitVector() = default;

  /// Normalizes `coords`; throws InvalidArgument for the zero vector or
  /// fewer than two coordinates.
  explicit UnitVector(std::vector<double> coords);

  /// Point of S^1 at polar angle `theta` (radians).
  static UnitVector from_angle(double theta);
  /// Point of S^2 with colatitude `colat` from e3 and azimuth `azimuth`.
  static UnitVector from_spherical(double colat, double azimuth);
  /// The k-th standard basis vector of R^{m+1}.
  static UnitVector axis(std::size_t ambient_dim, std::size_t k);

  std::size_t ambient_dim() const noexcept { return coords_.size(); }
  /// Intrinsic dimension m of the sphere.
  std::size_t dim() const noexcept { return coords_.size() - 1; }

  double operator[](std::size_t i) const { return coords_[i]; }
  std::span<const double> coords() const noexcept { return coords_; }

  UnitVector operator-() const;

  /// Polar angle in [0, 2pi) for points of S^1.
  double angle() const;

  friend bool operator==(const UnitVector&, const UnitVector&) = default;

 private:
  std::vector<double> coords_;
};

double dot(const UnitVector& a, const UnitVector& b);
double dot(std::span<const double> a, std::span<const double> b);

/// Inner product clamped to [-1, 1].
double clamped_dot(const UnitVector& a, const UnitVector& b);

/// Geodesic distance on the sphere, in [0, pi].
double spherical_distance(const UnitVector& u, const UnitVector& v);

/// Real number or +infinity. Used for transport costs and c-transforms,
/// both of which can take the value +infinity but never -infinity.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  constexpr explicit ExtendedReal(double v) : value_(v) {}
  static constexpr ExtendedReal infinite() {
    return ExtendedReal(std::numeric_limits<double>::infinity());
  }

  constexpr bool is_infinite() const noexcept {
    return value_ == std::numeric_limits<double>::infinity();
  }
  constexpr bool is_finite() const noexcept { return !is_infinite(); }
  /// Finite value; throws UndefinedArithmetic when infinite.
  double value() const;
  /// Raw representation, +inf for the infinite value.
  constexpr double raw() const noexcept { return value_; }

  friend ExtendedReal operator+(ExtendedReal a, ExtendedReal b);
  friend ExtendedReal operator-(ExtendedReal a, ExtendedReal b);
  friend constexpr bool operator==(ExtendedReal a, ExtendedReal b) { return a.value_ == b.value_; }
  friend constexpr auto operator<=>(ExtendedReal a, ExtendedReal b) { return a.value_ <=> b.value_; }

 private:
  double value_ = 0.0;
};

using ExtendedCost = ExtendedReal;

/// Transport cost -log<n, x> for <n, x> > 0, +infinity otherwise.
ExtendedCost cost(const UnitVector& n, const UnitVector& x);

/// Raw cost as a double (+inf when infinite), for inner loops.
double cost_value(const UnitVector& n, const UnitVector& x);
double cost_from_dot(double inner);

constexpr double kNegInfinity = -std::numeric_limits<double>::infinity();

/// c-transform of an atomic function: min over atoms of c(query, x) - f(x).
/// `values` may contain kNegInfinity for atoms outside the effective domain.
/// Returns +infinity when no finite-value atom lies within pi/2 of `query`.
/// Throws EmptyEffectiveDomain when every value is kNegInfinity.
ExtendedReal c_transform(std::span<const double> values, std::span<const UnitVector> atoms,
                         const UnitVector& query);

void require_same_dim(const UnitVector& a, const UnitVector& b);

}  // namespace gip
