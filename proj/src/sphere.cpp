#include "gip/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace gip {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyEffectiveDomain: return "EmptyEffectiveDomain";
    case ErrorCode::NotAbsolutelyContinuous: return "NotAbsolutelyContinuous";
    case ErrorCode::RepresentativeNotFound: return "RepresentativeNotFound";
    case ErrorCode::TooManyAtomsForExact: return "TooManyAtomsForExact";
    case ErrorCode::NoFeasiblePlan: return "NoFeasiblePlan";
    case ErrorCode::MarginalMismatch: return "MarginalMismatch";
    case ErrorCode::NegativeCycle: return "NegativeCycle";
    case ErrorCode::UnboundedPotential: return "UnboundedPotential";
    case ErrorCode::VertexSetMismatch: return "VertexSetMismatch";
    case ErrorCode::ConcentratedTarget: return "ConcentratedTarget";
    case ErrorCode::WeakAleksandrovViolated: return "WeakAleksandrovViolated";
    case ErrorCode::VerificationFailed: return "VerificationFailed";
    case ErrorCode::MalformedInput: return "MalformedInput";
    case ErrorCode::UndefinedArithmetic: return "UndefinedArithmetic";
  }
  return "Unknown";
}

UnitVector::UnitVector(std::vector<double> coords) : coords_(std::move(coords)) {
  if (coords_.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "unit vector needs at least two coordinates");
  }
  double norm2 = 0.0;
  for (double c : coords_) norm2 += c * c;
  const double norm = std::sqrt(norm2);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error(ErrorCode::InvalidArgument, "cannot normalize a zero or non-finite vector");
  }
  for (double& c : coords_) c /= norm;
}

UnitVector UnitVector::from_angle(double theta) {
  return UnitVector(std::vector<double>{std::cos(theta), std::sin(theta)});
}

UnitVector UnitVector::from_spherical(double colat, double azimuth) {
  const double s = std::sin(colat);
  return UnitVector(std::vector<double>{s * std::cos(azimuth), s * std::sin(azimuth), std::cos(colat)});
}

UnitVector UnitVector::axis(std::size_t ambient_dim, std::size_t k) {
  std::vector<double> c(ambient_dim, 0.0);
  c.at(k) = 1.0;
  return UnitVector(std::move(c));
}

UnitVector UnitVector::operator-() const {
  UnitVector out = *this;
  for (double& c : out.coords_) c = -c;
  return out;
}

double UnitVector::angle() const {
  if (ambient_dim() != 2) throw Error(ErrorCode::DimensionMismatch, "angle() is defined on S^1 only");
  double a = std::atan2(coords_[1], coords_[0]);
  if (a < 0.0) a += 2.0 * std::numbers::pi;
  if (a >= 2.0 * std::numbers::pi) a -= 2.0 * std::numbers::pi;
  return a;
}

void require_same_dim(const UnitVector& a, const UnitVector& b) {
  if (a.ambient_dim() != b.ambient_dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "S^" + std::to_string(a.dim()) + " vs S^" + std::to_string(b.dim()));
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double dot(const UnitVector& a, const UnitVector& b) {
  require_same_dim(a, b);
  return dot(a.coords(), b.coords());
}

double clamped_dot(const UnitVector& a, const UnitVector& b) {
  return std::clamp(dot(a, b), -1.0, 1.0);
}

double spherical_distance(const UnitVector& u, const UnitVector& v) {
  return std::acos(clamped_dot(u, v));
}

double ExtendedReal::value() const {
  if (is_infinite()) throw Error(ErrorCode::UndefinedArithmetic, "value() of +infinity");
  return value_;
}

ExtendedReal operator+(ExtendedReal a, ExtendedReal b) {
  if (a.is_infinite() || b.is_infinite()) return ExtendedReal::infinite();
  return ExtendedReal(a.value_ + b.value_);
}

ExtendedReal operator-(ExtendedReal a, ExtendedReal b) {
  if (b.is_infinite()) {
    throw Error(ErrorCode::UndefinedArithmetic, "subtracting +infinity");
  }
  if (a.is_infinite()) return ExtendedReal::infinite();
  return ExtendedReal(a.value_ - b.value_);
}

double cost_from_dot(double inner) {
  inner = std::min(inner, 1.0);
  if (inner > 0.0) return -std::log(inner);
  return std::numeric_limits<double>::infinity();
}

double cost_value(const UnitVector& n, const UnitVector& x) { return cost_from_dot(dot(n, x)); }

ExtendedCost cost(const UnitVector& n, const UnitVector& x) { return ExtendedCost(cost_value(n, x)); }

ExtendedReal c_transform(std::span<const double> values, std::span<const UnitVector> atoms,
                         const UnitVector& query) {
  if (atoms.empty() || values.size() != atoms.size()) {
    throw Error(ErrorCode::InvalidArgument, "c_transform needs one value per atom");
  }
  bool any_finite_value = false;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    if (values[j] == kNegInfinity) continue;
    any_finite_value = true;
    const double c = cost_value(query, atoms[j]);
    if (!std::isfinite(c)) continue;
    best = std::min(best, c - values[j]);
  }
  if (!any_finite_value) {
    throw Error(ErrorCode::EmptyEffectiveDomain, "all values are -infinity");
  }
  return ExtendedReal(best);
}

}  // namespace gip
