#include "gip/polish.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>

namespace gip {

namespace {

// Residual vector, or nothing when the radii do not describe a valid body.
std::optional<Eigen::VectorXd> residual(const std::vector<UnitVector>& atoms, const std::vector<double>& psi,
                                        const std::vector<double>& target, const DensityMeasure& lambda) {
  try {
    const auto body = oliker_transform(atoms, psi);
    const auto image = gauss_image_measure(body, lambda, IntegrationMode::Exact);
    Eigen::VectorXd g(static_cast<Eigen::Index>(atoms.size()));
    for (std::size_t j = 0; j < atoms.size(); ++j) g[static_cast<Eigen::Index>(j)] = image.weights[j] - target[j];
    return g;
  } catch (const Error&) {
    return std::nullopt;
  }
}

bool has_empty_cone(const Eigen::VectorXd& g, const std::vector<double>& target) {
  for (std::size_t j = 0; j < target.size(); ++j) {
    if (target[j] > 0 && g[static_cast<Eigen::Index>(j)] + target[j] <= 0.0) return true;
  }
  return false;
}

// Pushes swallowed directions just outside the hull so their cones open.
void lift_swallowed(const std::vector<UnitVector>& atoms, std::vector<double>& psi) {
  try {
    const auto body = oliker_transform(atoms, psi);
    for (std::size_t j : body.swallowed(0.0)) psi[j] = std::log(radial_function(body, atoms[j])) + 1e-6;
    const auto cones = normal_cones(body);
    for (std::size_t j = 0; j < atoms.size(); ++j) {
      if (cones[j].empty()) psi[j] += 1e-6;
    }
  } catch (const Error&) {
  }
}

}  // namespace

PolishResult polish_radii(const std::vector<UnitVector>& atoms, std::vector<double> psi,
                          const std::vector<double>& target, const DensityMeasure& lambda, double tol,
                          std::size_t max_iterations) {
  PolishResult out;
  out.psi = psi;
  if (!lambda.exact_on_circle() && !lambda.exact_on_sphere2()) {
    out.applicable = false;
    return out;
  }
  lift_swallowed(atoms, psi);
  auto g = residual(atoms, psi, target, lambda);
  if (!g) return out;
  const auto k = static_cast<Eigen::Index>(atoms.size());
  constexpr double h = 1e-7;
  while (true) {
    out.psi = psi;
    out.residual = g->cwiseAbs().maxCoeff();
    if (out.residual < tol) {
      out.converged = true;
      return out;
    }
    if (out.iterations == max_iterations) return out;
    ++out.iterations;
    Eigen::MatrixXd jac(k, k);
    for (Eigen::Index c = 0; c < k; ++c) {
      auto plus = psi, minus = psi;
      plus[static_cast<std::size_t>(c)] += h;
      minus[static_cast<std::size_t>(c)] -= h;
      const auto gp = residual(atoms, plus, target, lambda);
      const auto gm = residual(atoms, minus, target, lambda);
      if (gp && gm) {
        jac.col(c) = (*gp - *gm) / (2 * h);
      } else if (gp) {
        jac.col(c) = (*gp - *g) / h;
      } else if (gm) {
        jac.col(c) = (*g - *gm) / h;
      } else {
        return out;
      }
    }
    const Eigen::VectorXd step = jac.completeOrthogonalDecomposition().solve(-*g);
    bool accepted = false;
    for (double t = 1.0; t > 1e-9; t /= 2) {
      auto trial = psi;
      for (Eigen::Index c = 0; c < k; ++c) trial[static_cast<std::size_t>(c)] += t * step[c];
      const auto gt = residual(atoms, trial, target, lambda);
      if (!gt || has_empty_cone(*gt, target)) continue;
      if (gt->cwiseAbs().maxCoeff() < out.residual) {
        psi = std::move(trial);
        g = gt;
        accepted = true;
        break;
      }
    }
    if (!accepted) return out;
  }
}

}  // namespace gip
