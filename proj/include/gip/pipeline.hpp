#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gip/body.hpp"
#include "gip/measures.hpp"
#include "gip/polish.hpp"
#include "gip/potential.hpp"
#include "gip/transport.hpp"

namespace gip {

struct SolveConfig {
  /// Radians in (0, pi/4); searched automatically when unset.
  std::optional<double> alpha;
  /// Common denominator of the discretized masses; 0 picks the largest
  /// multiple of the target denominators not above 10^5.
  std::int64_t denominator = 0;
  /// Monte Carlo samples for verification.
  std::size_t samples = 1'000'000;
  std::uint64_t seed = kDefaultSeed;
  std::uint64_t pivot_seed = 0;
  /// Refine the discrete radii by Newton steps on the exact normal-cone masses.
  bool polish = true;
  double gamma_tolerance = 1e-7;
  double constraint_tolerance = 1e-9;
  double exact_pushforward_tolerance = 1e-9;
  /// Largest partition considered by the automatic alpha search.
  std::size_t max_cells = 200'000;

  /// Throws InvalidArgument when a field is out of range.
  void validate(std::size_t target_atoms) const;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

enum class SolveStatus { Solved, FailedVerification };
std::string to_string(SolveStatus s);

struct SolveReport {
  SolveStatus status = SolveStatus::FailedVerification;
  double alpha = 0.0;
  std::size_t cells = 0;
  std::size_t source_atoms = 0;
  std::size_t target_atoms = 0;
  std::int64_t denominator = 0;

  bool weak_aleksandrov = false;
  bool weak_aleksandrov_certifying = false;
  double primal_cost = 0.0;
  double dual_value = 0.0;
  double duality_gap = 0.0;
  SimplexStats simplex;

  std::size_t support_size = 0;
  std::size_t components = 0;
  bool every_vertex_on_cycle = false;
  bool hop_bound = false;
  std::size_t max_hops = 0;
  std::vector<std::vector<double>> connectors;
  double psi_bound = 0.0;
  double psi_max = 0.0;
  /// "paths" for the glued formula, "all-pairs" for the fallback.
  std::string gluing;

  SubdifferentialVerdict subdifferential;
  double worst_constraint = 0.0;
  double worst_gamma_gap = 0.0;
  MonotonicityVerdict monotonicity;
  PolishResult polish;

  GaussImage pushforward;
  std::vector<double> pushforward_error;
  AngleBound angle;
  double inradius = 0.0;
  double circumradius = 0.0;
  std::vector<std::size_t> swallowed;

  std::vector<CheckResult> checks;
  /// Wall-clock milliseconds per stage.
  std::map<std::string, double> timings;

  bool passed(const std::string& check) const;
};

struct Solution {
  ConvexBodyRep body;
  SolveReport report;
  AtomicMeasure lambda_d;
  AtomicMeasure mu_d;
  TransportPlan hall_plan;
  TransportPlan plan;
  DualSolution dual;
  /// Glued potential at the atoms of mu_d and its c-transforms.
  std::vector<double> psi_d;
  std::vector<double> phi_c_d;
  std::vector<std::pair<UnitVector, UnitVector>> gamma;
};

class ConcentratedTargetError : public Error {
 public:
  explicit ConcentratedTargetError(UnitVector witness);
  /// Pole of a closed hemisphere holding every atom.
  const UnitVector& witness() const noexcept { return witness_; }

 private:
  UnitVector witness_;
};

class WeakAleksandrovError : public Error {
 public:
  WeakAleksandrovError(WeakAleksandrovVerdict verdict, double alpha);
  const WeakAleksandrovVerdict& verdict() const noexcept { return verdict_; }
  double alpha() const noexcept { return alpha_; }

 private:
  WeakAleksandrovVerdict verdict_;
  double alpha_;
};

class VerificationError : public Error {
 public:
  VerificationError(const std::string& check, SolveReport report);
  const SolveReport& report() const noexcept { return report_; }

 private:
  SolveReport report_;
};

/// Weak Aleksandrov at alpha: exact up to kMaxExactAtoms atoms, sampled beyond.
WeakAleksandrovVerdict weak_aleksandrov_at(const AtomicMeasure& mu, const DensityMeasure& lambda, double alpha,
                                           std::uint64_t seed = kDefaultSeed);

/// Largest alpha of the grid (pi/4) 2^(-i/4), i >= 1, at which weak
/// Aleksandrov holds and a Hall plan exists, found by galloping from i = 1
/// and bisecting. Throws the failure of the smallest admissible alpha when
/// none works.
double auto_alpha(const DensityMeasure& lambda, const AtomicMeasure& mu, const SolveConfig& config);

/// Full pipeline. Conditions and infeasibility throw; failed verification
/// returns status FailedVerification with the body still attached.
Solution solve_gauss_image(const DensityMeasure& lambda, const AtomicMeasure& mu, const SolveConfig& config = {});

/// Re-verifies a body: pushforward masses, vertex extremality, origin
/// interior, angle bound and the subdifferential certificate on sampled
/// pairs (n, T_K(n)). Throws VertexSetMismatch when the directions differ
/// from the atoms of mu.
SolveReport run_verification(const ConvexBodyRep& body, const DensityMeasure& lambda, const AtomicMeasure& mu,
                             const SolveConfig& config = {});

}  // namespace gip
