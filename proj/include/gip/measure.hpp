#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gip/rational.hpp"
#include "gip/sampling.hpp"
#include "gip/sphere.hpp"

namespace gip {

/// Finitely supported measure sum_j w_j delta_{x_j}.
class AtomicMeasure {
 public:
  AtomicMeasure() = default;
  /// Real weights. Atoms must be pairwise distinct and weights positive.
  AtomicMeasure(std::vector<UnitVector> atoms, std::vector<double> weights);
  /// Exact rational weights; the double weights are derived from them.
  AtomicMeasure(std::vector<UnitVector> atoms, std::vector<Fraction> weights);

  std::size_t size() const noexcept { return atoms_.size(); }
  std::size_t ambient_dim() const { return atoms_.empty() ? 0 : atoms_.front().ambient_dim(); }
  const std::vector<UnitVector>& atoms() const noexcept { return atoms_; }
  const UnitVector& atom(std::size_t j) const { return atoms_.at(j); }
  const std::vector<double>& weights() const noexcept { return weights_; }
  double weight(std::size_t j) const { return weights_.at(j); }
  bool is_rational() const noexcept { return exact_.has_value(); }
  const std::vector<Fraction>& exact_weights() const;
  double total() const noexcept { return total_; }

  /// Same atoms reordered: atom k of the result is atom perm[k] of this one.
  AtomicMeasure permuted(std::span<const std::size_t> perm) const;

 private:
  void validate() const;

  std::vector<UnitVector> atoms_;
  std::vector<double> weights_;
  std::optional<std::vector<Fraction>> exact_;
  double total_ = 0.0;
};

/// Half-open arc [start, start + length) of S^1, angles in radians.
struct Arc {
  double start = 0.0;
  double length = 0.0;
};

/// Arc carrying a constant density with respect to arc length.
struct WeightedArc {
  double start = 0.0;
  double length = 0.0;
  double density = 0.0;
};

struct Cap {
  UnitVector center;
  double radius = 0.0;
};

enum class DensityFamily { Uniform, Caps, PiecewiseArcs, Custom };

std::string to_string(DensityFamily f);

/// Probability measure absolutely continuous w.r.t. the surface measure.
/// Uniform, cap-union and (on S^1) piecewise-constant families integrate
/// exactly on S^1; everything else integrates by seeded Monte Carlo.
class DensityMeasure {
 public:
  static DensityMeasure uniform(std::size_t ambient_dim);
  /// Normalized uniform density on the union of the caps.
  static DensityMeasure caps(std::vector<Cap> caps);
  /// S^1 only: piecewise-constant density on disjoint arcs, normalized here.
  static DensityMeasure piecewise_arcs(std::vector<WeightedArc> arcs);
  /// `density` is w.r.t. the surface measure and bounded by `bound`.
  static DensityMeasure custom(std::size_t ambient_dim, std::function<double(const UnitVector&)> density,
                               double bound);

  DensityFamily family() const noexcept { return family_; }
  std::size_t ambient_dim() const noexcept { return ambient_dim_; }
  std::size_t dim() const noexcept { return ambient_dim_ - 1; }
  const std::vector<Cap>& cap_list() const noexcept { return caps_; }

  double density(const UnitVector& x) const;
  bool in_support(const UnitVector& x) const;

  /// True when arc masses are computed in closed form (S^1, non-custom).
  bool exact_on_circle() const noexcept { return ambient_dim_ == 2 && family_ != DensityFamily::Custom; }
  /// Disjoint weighted arcs describing the density on S^1 (exact families).
  const std::vector<WeightedArc>& circle_pieces() const;
  /// Exact mass of an arc of S^1 (exact families only).
  double arc_mass(const Arc& arc) const;
  /// Uniform on S^2: region masses reduce to areas.
  bool exact_on_sphere2() const noexcept {
    return ambient_dim_ == 3 && family_ == DensityFamily::Uniform;
  }

  /// Draws a point distributed according to the measure.
  UnitVector sample(std::mt19937_64& rng) const;

  std::uint64_t mc_seed = kDefaultSeed;
  std::size_t mc_samples = 1'000'000;

 private:
  DensityFamily family_ = DensityFamily::Uniform;
  std::size_t ambient_dim_ = 2;
  std::vector<Cap> caps_;
  std::vector<double> cap_sample_weights_;
  std::vector<WeightedArc> pieces_;
  double support_area_ = 0.0;
  std::function<double(const UnitVector&)> custom_density_;
  double custom_bound_ = 0.0;
};

/// Surface measure of S^m.
double sphere_area(std::size_t ambient_dim);
/// Surface measure of a cap of angular radius r on S^m (m = 1, 2 closed form).
double cap_area(std::size_t ambient_dim, double r);

/// Normalizes an angle to [0, 2pi).
double wrap_angle(double a);
/// Disjoint, sorted arcs covering the same set as `arcs`.
std::vector<Arc> arc_union(std::vector<Arc> arcs);
/// Length of the intersection of two arcs.
double arc_overlap(const Arc& a, const Arc& b);

struct MassEstimate {
  double value = 0.0;
  double std_error = 0.0;
  bool exact = false;
};

/// Exact mass of a union of arcs on S^1.
MassEstimate measure_of(const DensityMeasure& lambda, const std::vector<Arc>& region);
/// Exact mass of a closed cap (S^1 exact families, uniform S^2), else Monte Carlo.
MassEstimate measure_of(const DensityMeasure& lambda, const Cap& cap);
/// Monte Carlo estimate of the mass of a region given by a membership test.
MassEstimate measure_of(const DensityMeasure& lambda, const std::function<bool(const UnitVector&)>& region,
                        std::size_t samples, std::uint64_t seed);

}  // namespace gip
