#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gip/measure.hpp"
#include "gip/partition.hpp"

namespace gip {

/// Where the atoms of a discretized atomic measure are placed.
enum class AtomPlacement {
  /// The representative of the containing cell.
  CellRepresentative,
  /// The original atom when it is alone in its cell, otherwise the
  /// normalized weighted mean of the atoms sharing the cell.
  OriginalAtom,
};

/// One atom per cell of positive mass at the cell representative.
AtomicMeasure discretize(const DensityMeasure& theta, const SphericalPartition& partition,
                         const SupportTest& support = {});
/// Atoms moved into their cells; atoms sharing a cell are merged.
AtomicMeasure discretize(const AtomicMeasure& theta, const SphericalPartition& partition,
                         const SupportTest& support = {},
                         AtomPlacement placement = AtomPlacement::CellRepresentative);

struct HemisphereVerdict {
  bool concentrated = false;
  /// Unit u with <u, w_j> >= 0 for every atom, when concentrated.
  std::optional<UnitVector> witness;
};

/// Some u != 0 with <u, x> >= -tol for all points, if one exists.
std::optional<UnitVector> closed_hemisphere_witness(const std::vector<UnitVector>& points, double tol = 1e-12);

HemisphereVerdict check_hemisphere_concentration(const AtomicMeasure& mu);

enum class CheckMode { Exact, Sampled };

struct WeakAleksandrovVerdict {
  bool holds = true;
  /// Atom indices of the first failing subset.
  std::vector<std::size_t> violating_subset;
  double mu_mass = 0.0;
  double lambda_mass = 0.0;
  std::size_t subsets_checked = 0;
  /// Every relevant subset was examined (exact mode).
  bool certifying = false;
  /// Neighbourhood masses were integrated exactly rather than by sampling.
  bool exact_integration = false;
};

/// mu(F) <= lambda(F_{pi/2 - 2 alpha}) over atom subsets F lying in a closed
/// hemisphere. Exact mode enumerates every subset (at most 20 atoms);
/// sampled mode checks all singletons plus `budget` random hemispherical
/// subsets and does not certify the condition.
WeakAleksandrovVerdict check_weak_aleksandrov(const AtomicMeasure& mu, const DensityMeasure& lambda, double alpha,
                                              CheckMode mode = CheckMode::Exact, std::size_t budget = 256,
                                              std::uint64_t seed = kDefaultSeed);

constexpr std::size_t kMaxExactAtoms = 20;

struct AleksandrovVerdict {
  bool holds = true;
  /// Hull vertices (atom indices) of the failing set, or empty for a cap.
  std::vector<std::size_t> hull;
  std::optional<Cap> cap;
  double mu_mass = 0.0;
  double lambda_mass = 0.0;
  bool exact = false;
};

/// Strict inequality mu(w) < lambda(w_{pi/2}) over convex hulls w of atom
/// subsets: every arc on S^1, hulls of at most three atoms plus `samples`
/// random caps on S^2. Advisory only.
AleksandrovVerdict check_aleksandrov_classical(const AtomicMeasure& mu, const DensityMeasure& lambda,
                                               std::size_t samples = 256, std::uint64_t seed = kDefaultSeed);

}  // namespace gip
