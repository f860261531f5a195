#pragma once

#include <cstdint>
#include <optional>
#include <tuple>
#include <utility>
#include <vector>

#include "gip/measure.hpp"

namespace gip {

/// Coupling of two atomic measures stored as integer units of 1/denominator.
struct TransportPlan {
  struct Entry {
    std::size_t i = 0;
    std::size_t j = 0;
    std::int64_t units = 0;
  };

  AtomicMeasure source;
  AtomicMeasure target;
  std::int64_t denominator = 1;
  /// Sorted by (i, j); every entry has units > 0.
  std::vector<Entry> entries;
  /// Marginals in units. They equal the measures' weights exactly unless the
  /// common denominator exceeded the cap and weights were rounded.
  std::vector<std::int64_t> source_units;
  std::vector<std::int64_t> target_units;
  /// Total absolute weight change caused by that rounding (0 when exact).
  double rounding_perturbation = 0.0;

  double mass(const Entry& e) const { return static_cast<double>(e.units) / static_cast<double>(denominator); }
  Fraction exact_mass(const Entry& e) const { return Fraction(e.units, denominator); }
  /// Orders entries and merges duplicates.
  void normalize();
  /// Throws MarginalMismatch unless row and column sums equal the marginals.
  void check_marginals() const;
};

/// Builds a plan from exact masses on (i, j) pairs.
TransportPlan make_plan(const AtomicMeasure& source, const AtomicMeasure& target,
                        const std::vector<std::tuple<std::size_t, std::size_t, Fraction>>& masses);

struct DualSolution {
  std::vector<double> phi;
  std::vector<double> psi;
};

/// Largest common denominator used for unit splitting.
constexpr std::int64_t kMaxUnits = 100'000;

/// Common denominator of both weight vectors, or 0 when it exceeds `cap`.
std::int64_t common_units(const AtomicMeasure& a, const AtomicMeasure& b, std::int64_t cap = kMaxUnits);

/// Infeasibility certificate: target atoms J whose total weight exceeds the
/// weight of every source atom within pi/2 - alpha of some atom of J.
class NoFeasiblePlanError : public Error {
 public:
  NoFeasiblePlanError(std::vector<std::size_t> deficient, std::vector<std::size_t> neighbourhood, double deficit);
  const std::vector<std::size_t>& deficient_set() const noexcept { return deficient_; }
  const std::vector<std::size_t>& neighbourhood() const noexcept { return neighbourhood_; }
  double deficit() const noexcept { return deficit_; }

 private:
  std::vector<std::size_t> deficient_;
  std::vector<std::size_t> neighbourhood_;
  double deficit_;
};

/// Plan supported on pairs at distance <= pi/2 - alpha. Both measures are
/// split into units of a common denominator and matched; throws
/// NoFeasiblePlanError with a deficient Hall set when no perfect matching
/// exists.
TransportPlan hall_feasible_plan(const AtomicMeasure& lambda_d, const AtomicMeasure& mu_d, double alpha);

/// Same construction on the explicit unit graph with Hopcroft-Karp. Only
/// practical for small denominators; used to cross-check the flow version.
TransportPlan hall_feasible_plan_by_matching(const AtomicMeasure& lambda_d, const AtomicMeasure& mu_d, double alpha);

struct SimplexOptions {
  /// Seed of the arc order scanned by the pricing rule.
  std::uint64_t pivot_seed = 0;
  std::size_t max_pivots = 50'000'000;
  /// Start from a greedy plan guided by an approximate dual instead of the
  /// given plan; the given plan is used when the greedy pass gets stuck.
  bool warm_start = true;
};

struct SimplexStats {
  std::size_t pivots = 0;
  std::size_t degenerate_pivots = 0;
  std::size_t components = 0;
};

/// Minimum-cost plan with the marginals of `initial`, over finite-cost pairs,
/// by the network simplex method started from `initial` or a warm start. Dual values satisfy
/// phi_i + psi_j <= c_ij on finite pairs with equality on the support and
/// phi = 0 at the lowest source atom of each connected component of the
/// finite-cost graph.
std::pair<TransportPlan, DualSolution> optimal_plan(const AtomicMeasure& lambda_d, const AtomicMeasure& mu_d,
                                                    const TransportPlan& initial, const SimplexOptions& options = {},
                                                    SimplexStats* stats = nullptr);

ExtendedCost plan_cost(const TransportPlan& plan);

/// Sum of lambda_i phi_i + mu_j psi_j with the plan's marginals.
double dual_value(const TransportPlan& plan, const DualSolution& dual);

struct MonotonicityVerdict {
  bool monotone = true;
  /// Pair indices of a violating cycle.
  std::vector<std::size_t> cycle;
  /// Smallest observed sum_i c(n_{i+1}, x_i) - c(n_i, x_i).
  double worst_slack = 0.0;
  bool exhaustive = true;
};

/// c-cyclical monotonicity over cycles of length <= max_cycle (at most 4):
/// exhaustive up to 200 pairs, random cycles beyond.
MonotonicityVerdict check_cyclical_monotonicity(const std::vector<std::pair<UnitVector, UnitVector>>& pairs,
                                                std::size_t max_cycle = 4, std::size_t random_cycles = 100'000,
                                                std::uint64_t seed = kDefaultSeed);

struct PlanCycle {
  /// Vertices (i_u, j_u) of the first plan; the second plan carries mass on
  /// (i_{u+1}, j_u), indices cyclic.
  std::vector<std::pair<std::size_t, std::size_t>> vertices;
  std::int64_t units = 0;
};

struct CycleDecomposition {
  std::vector<PlanCycle> cycles;
  std::size_t iterations = 0;
  std::int64_t denominator = 1;
};

/// Repeatedly removes a cycle alternating vertices of `pi_o` and edges of
/// `pi_alpha`, subtracting the smallest mass along it from both plans,
/// until both are empty. Throws MarginalMismatch unless the plans share
/// marginals.
CycleDecomposition decompose_cycles(const TransportPlan& pi_o, const TransportPlan& pi_alpha);

}  // namespace gip
