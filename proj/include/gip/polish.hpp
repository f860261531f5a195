#pragma once

#include <vector>

#include "gip/body.hpp"

namespace gip {

struct PolishResult {
  /// Log radii after the last accepted step.
  std::vector<double> psi;
  /// Largest |lambda(normal cone j) - mu_j|.
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  /// False when lambda has no exact normal-cone integration.
  bool applicable = true;
};

/// Damped Newton iteration on the log radii for
/// G_j(psi) = lambda(normal cone of vertex j) - mu_j = 0,
/// with a finite-difference Jacobian and minimum-norm least-squares steps.
/// Needs exact integration (exact families on S^1, uniform on S^2).
PolishResult polish_radii(const std::vector<UnitVector>& atoms, std::vector<double> psi,
                          const std::vector<double>& target, const DensityMeasure& lambda, double tol = 1e-13,
                          std::size_t max_iterations = 100);

}  // namespace gip
