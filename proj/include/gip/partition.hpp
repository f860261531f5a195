#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "gip/measure.hpp"
#include "gip/rational.hpp"
#include "gip/sphere.hpp"

namespace gip {

/// One cell of a spherical partition.
///
/// Cells are described in the partition's rotated frame by nested spherical
/// coordinates: a colatitude interval per recursion level (measured from the
/// level's pole) followed either by a polar cap or by an azimuth arc of S^1.
/// Intervals are half-open, (lo, hi], except the north cap [0, hi] and the
/// south cap (lo, pi].
struct SphericalCell {
  std::vector<std::size_t> path;
  std::vector<std::pair<double, double>> colatitude;
  bool is_cap = false;
  std::pair<double, double> azimuth{0.0, 0.0};
  UnitVector representative;
  /// Upper bound on the cell diameter (radians).
  double diameter = 0.0;
};

/// Recursive band structure of a partition of S^k.
struct PartitionNode {
  std::size_t dim = 1;
  // dim == 1: arcs (offset + i*step, offset + (i+1)*step].
  std::size_t arc_count = 0;
  double arc_offset = 0.0;
  // dim >= 2: band_count colatitude bands of width band_width; the first and
  // last are polar caps, the others carry a partition of S^{dim-1}.
  std::size_t band_count = 0;
  double band_width = 0.0;
  std::vector<PartitionNode> bands;
  std::vector<std::size_t> first_cell;
  std::size_t cell_count = 0;
};

class SphericalPartition {
 public:
  std::size_t dim() const noexcept { return root_.dim; }
  std::size_t ambient_dim() const noexcept { return root_.dim + 1; }
  double scale() const noexcept { return scale_; }
  std::size_t size() const noexcept { return cells_.size(); }
  const std::vector<SphericalCell>& cells() const noexcept { return cells_; }
  const SphericalCell& cell(std::size_t i) const { return cells_.at(i); }
  const PartitionNode& root() const noexcept { return root_; }
  /// Orthogonal matrix (row-major) taking ambient coordinates to the frame
  /// in which the bands are laid out.
  const std::vector<double>& rotation() const noexcept { return rotation_; }
  std::size_t offset_attempt() const noexcept { return attempt_; }

  bool has_masses() const noexcept { return masses_.has_value(); }
  const std::vector<double>& masses() const;
  bool has_exact_masses() const noexcept { return exact_masses_.has_value(); }
  const std::vector<Fraction>& exact_masses() const;
  /// Total absolute mass moved when rounding to the common denominator.
  double rounding_perturbation() const noexcept { return perturbation_; }
  std::int64_t denominator() const noexcept { return denominator_; }

  /// Index of the unique cell containing x.
  std::size_t locate(const UnitVector& x) const;
  bool contains(std::size_t cell, const UnitVector& x) const { return locate(x) == cell; }

  /// Ambient point from nested local coordinates: one colatitude per level
  /// and a unit `tail` vector on the innermost sphere.
  UnitVector from_local(const std::vector<double>& colatitudes, std::vector<double> tail) const;

 private:
  friend struct PartitionBuilder;

  PartitionNode root_;
  std::vector<SphericalCell> cells_;
  std::vector<double> rotation_;
  std::size_t attempt_ = 0;
  double scale_ = 0.0;
  std::optional<std::vector<double>> masses_;
  std::optional<std::vector<Fraction>> exact_masses_;
  double perturbation_ = 0.0;
  std::int64_t denominator_ = 0;
};

struct PartitionOptions {
  bool rationalize = false;
  std::int64_t denominator = 0;
  /// Upper bound on boundary-avoidance retries for atomic measures.
  std::size_t max_offset_attempts = 64;
};

/// Geometry only: cells of diameter < kappa, no masses.
SphericalPartition build_partition(std::size_t m, double kappa);
/// Partition with cell masses of an absolutely continuous measure.
SphericalPartition build_partition(std::size_t m, double kappa, const DensityMeasure& theta,
                                   const PartitionOptions& options = {});
/// Partition whose cell boundaries avoid every atom of `theta`.
/// Throws NotAbsolutelyContinuous when rationalization is requested.
SphericalPartition build_partition(std::size_t m, double kappa, const AtomicMeasure& theta,
                                   const PartitionOptions& options = {});

std::size_t locate(const SphericalPartition& partition, const UnitVector& x);

/// Cell masses of `theta`: exact on S^1 and for the uniform measure on S^2,
/// one seeded Monte Carlo pass otherwise.
std::vector<double> cell_masses(const SphericalPartition& partition, const DensityMeasure& theta);

/// Membership test for support constraints.
using SupportTest = std::function<bool(const UnitVector&)>;

/// A point of the cell interior, inside `support` when one is given: the
/// cell centroid when admissible, otherwise seeded rejection sampling.
/// Throws RepresentativeNotFound after `budget` draws.
UnitVector pick_representative(const SphericalPartition& partition, std::size_t cell,
                               const SupportTest& support = {}, std::size_t budget = 10'000,
                               std::uint64_t seed = kDefaultSeed);

/// Uniform point of the cell (area-uniform on S^1 and S^2).
UnitVector sample_in_cell(const SphericalPartition& partition, std::size_t cell, std::mt19937_64& rng);

}  // namespace gip
