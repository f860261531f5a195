#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "gip/transport.hpp"

namespace gip {

/// Vertices (i, j) of the optimal plan with the primal edges of the alpha
/// plan and the enlarged edges, stored implicitly.
struct SupportGraph {
  std::vector<std::pair<std::size_t, std::size_t>> vertices;
  /// alpha_sources[j]: sources u with pi_alpha(u, j) > 0. Edge (i, j) -> (u, v)
  /// is primal iff u is listed for j.
  std::vector<std::vector<std::size_t>> alpha_sources;
  std::vector<UnitVector> source_atoms;
  std::vector<UnitVector> target_atoms;
  double alpha = 0.0;
  /// Chain component of every target atom at scale kappa = alpha / 4.
  std::vector<std::size_t> component;
  std::size_t component_count = 0;

  bool primal_edge(std::size_t a, std::size_t b) const;
  /// d(z_u, w_j) < pi/2 - alpha/4 for a = (i, j), b = (u, v).
  bool enlarged_edge(std::size_t a, std::size_t b) const;

  // Certificates computed by build_graph.
  bool primal_within_enlarged = false;
  bool every_vertex_on_cycle = false;
  /// Largest hop count of a shortest enlarged path between vertices whose
  /// targets share a component, over the sampled start vertices.
  std::size_t max_hops = 0;
  bool hop_bound_holds = false;
};

/// Throws MarginalMismatch unless both plans live on the same atoms with
/// the same marginals.
SupportGraph build_graph(const TransportPlan& pi_o, const TransportPlan& pi_alpha, double alpha,
                         std::size_t hop_sources = 64);

/// Component label per atom for the relation "joined by steps shorter than
/// kappa"; labels are numbered by smallest member.
std::vector<std::size_t> chain_components(const std::vector<UnitVector>& atoms, double kappa);

class NegativeCycleError : public Error {
 public:
  NegativeCycleError(std::vector<std::size_t> cycle, double weight);
  /// Pair indices along the improving cycle.
  const std::vector<std::size_t>& cycle() const noexcept { return cycle_; }
  double weight() const noexcept { return weight_; }

 private:
  std::vector<std::size_t> cycle_;
  double weight_;
};

constexpr double kNegativeCycleTolerance = 1e-9;

/// The pairs of Gamma with the c-path structure: edge (n, x) -> (n', x') of
/// weight c(n', x) - c(n, x) whenever c(n', x) is finite. Paths are reduced
/// to the distinct targets, so path values cost O(#pairs * #targets).
class CPathGraph {
 public:
  explicit CPathGraph(std::vector<std::pair<UnitVector, UnitVector>> pairs);

  std::size_t pair_count() const noexcept { return pairs_.size(); }
  const std::pair<UnitVector, UnitVector>& pair(std::size_t a) const { return pairs_.at(a); }
  /// Distinct targets in order of first appearance.
  const std::vector<UnitVector>& targets() const noexcept { return targets_; }
  std::size_t target_of(std::size_t a) const { return target_of_.at(a); }

  struct Paths {
    std::size_t base = 0;
    /// Minimum over pairs a at target t of dist(a) - c(n_a, t); +inf when unreachable.
    std::vector<double> target_value;
    /// Minimum c-path cost from the base pair to pair b.
    double to_pair(const CPathGraph& g, std::size_t b) const;
  };

  /// Shortest c-paths from `base`. Throws NegativeCycleError for a cycle of
  /// weight below -kNegativeCycleTolerance.
  Paths from(std::size_t base) const;
  /// Shortest c-paths starting at any pair (base is pair_count()).
  Paths from_every_pair() const;

 private:
  std::vector<std::pair<UnitVector, UnitVector>> pairs_;
  std::vector<UnitVector> targets_;
  std::vector<std::size_t> target_of_;
  std::vector<double> self_cost_;
  // step_[z * k + t]: cheapest move from target z into target t and its pair.
  std::vector<double> step_;
  std::vector<std::size_t> step_pair_;

  Paths relax_from(Paths p) const;
};

/// psi_C at every target of the graph: sup over c-paths gamma from `base`
/// to (n, x) of -c(gamma) + c(n, x); kNegInfinity where unreachable.
std::vector<double> component_potential(const CPathGraph& gamma, std::size_t base);

/// Minimum c-path costs between base pairs; +inf when no path, 0 on the diagonal.
std::vector<std::vector<double>> connector_costs(const CPathGraph& gamma, const std::vector<std::size_t>& bases);

/// psi(x) = max_i -c_ij + psi_{C_j}(x) for x in component j.
/// `component_psi[j]` holds psi_{C_j} over all targets; `label[t]` is the
/// component of target t.
std::vector<double> global_psi(const std::vector<std::vector<double>>& component_psi,
                               const std::vector<std::vector<double>>& connectors,
                               const std::vector<std::size_t>& label);

/// Upper bound #G * (-ln cos(pi/2 - alpha/8)) on the glued potential.
double psi_upper_bound(std::size_t vertex_count, double alpha);

/// phi = psi^c for psi given at atoms (kNegInfinity off the effective domain).
class KantorovichPotential {
 public:
  KantorovichPotential(std::vector<UnitVector> atoms, std::vector<double> psi);
  /// Throws UnboundedPotential when no finite-psi atom lies within pi/2.
  double operator()(const UnitVector& n) const;
  const std::vector<UnitVector>& atoms() const noexcept { return atoms_; }
  const std::vector<double>& psi() const noexcept { return psi_; }
  /// Largest |phi(a) - phi(b)| / d(a, b) over `samples` random nearby pairs.
  double lipschitz_estimate(std::size_t samples = 2000, std::uint64_t seed = kDefaultSeed) const;

 private:
  std::vector<UnitVector> atoms_;
  std::vector<double> psi_;
};

KantorovichPotential potential_phi(const std::vector<double>& psi, const std::vector<UnitVector>& atoms);

struct SubdifferentialVerdict {
  bool passed = false;
  /// Largest phi(n) + phi^c(x) - c(n, x) over sampled finite-cost pairs.
  double worst_constraint = 0.0;
  /// Largest |phi(n) + phi^c(x) - c(n, x)| over Gamma.
  double worst_gamma_gap = 0.0;
  /// Largest |phi^cc - phi| over sampled directions.
  double worst_cc_error = 0.0;
};

/// Checks phi(n) + phi^c(x) <= c(n, x) + 1e-9 on samples, equality within
/// 1e-7 on Gamma and phi^cc = phi within 1e-9 at `directions` samples.
/// phi^cc is the c-transform of phi^c over `candidates`.
SubdifferentialVerdict verify_subdifferential(const std::vector<std::pair<UnitVector, UnitVector>>& gamma,
                                              const KantorovichPotential& phi,
                                              const std::function<double(const UnitVector&)>& phi_c,
                                              const std::vector<UnitVector>& candidates,
                                              std::size_t directions = 1000, std::uint64_t seed = kDefaultSeed);

}  // namespace gip
