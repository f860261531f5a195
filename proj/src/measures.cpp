#include "gip/measures.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <unordered_map>

namespace gip {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kBlock = 1 << 16;

Eigen::MatrixXd as_matrix(const std::vector<UnitVector>& points, const std::vector<std::size_t>& rows) {
  const std::size_t d = points.front().ambient_dim();
  Eigen::MatrixXd a(rows.size(), d);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < d; ++c) a(r, c) = points[rows[r]][c];
  }
  return a;
}

// Unit normals to every hyperplane spanned by `ambient - 1` of the points,
// together with the orthogonal complement of all points when it is nonzero.
std::vector<Eigen::VectorXd> hemisphere_candidates(const std::vector<UnitVector>& points) {
  const std::size_t d = points.front().ambient_dim();
  const std::size_t n = points.size();
  std::vector<Eigen::VectorXd> out;
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  Eigen::FullPivLU<Eigen::MatrixXd> full(as_matrix(points, all));
  full.setThreshold(1e-10);
  if (full.rank() < static_cast<Eigen::Index>(d)) {
    const Eigen::MatrixXd k = full.kernel();
    for (Eigen::Index c = 0; c < k.cols(); ++c) out.push_back(k.col(c).normalized());
    return out;
  }
  std::vector<std::size_t> pick(d - 1);
  // Lexicographic enumeration of (d-1)-subsets.
  for (std::size_t i = 0; i < d - 1; ++i) pick[i] = i;
  if (n < d - 1) return out;
  for (;;) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(as_matrix(points, pick));
    lu.setThreshold(1e-10);
    if (lu.rank() == static_cast<Eigen::Index>(d - 1)) out.push_back(lu.kernel().col(0).normalized());
    std::size_t i = d - 1;
    while (i > 0 && pick[i - 1] == n - (d - 1) + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < d - 1; ++j) pick[j] = pick[j - 1] + 1;
  }
  return out;
}

bool covers_all(const Eigen::VectorXd& u, const std::vector<UnitVector>& points, double tol) {
  for (const auto& p : points) {
    double s = 0.0;
    for (std::size_t c = 0; c < p.ambient_dim(); ++c) s += u[static_cast<Eigen::Index>(c)] * p[c];
    if (s < -tol) return false;
  }
  return true;
}

UnitVector to_unit(const Eigen::VectorXd& v) { return UnitVector(std::vector<double>(v.data(), v.data() + v.size())); }

}  // namespace

AtomicMeasure discretize(const DensityMeasure& theta, const SphericalPartition& partition,
                         const SupportTest& support) {
  const bool exact = partition.has_exact_masses();
  const std::vector<double> masses = partition.has_masses() ? partition.masses() : cell_masses(partition, theta);
  std::vector<UnitVector> atoms;
  std::vector<double> weights;
  std::vector<Fraction> fractions;
  for (std::size_t k = 0; k < partition.size(); ++k) {
    if (exact ? partition.exact_masses()[k] <= Fraction(0) : !(masses[k] > 0.0)) continue;
    atoms.push_back(pick_representative(partition, k, support));
    weights.push_back(masses[k]);
    if (exact) fractions.push_back(partition.exact_masses()[k]);
  }
  if (exact) return AtomicMeasure(std::move(atoms), std::move(fractions));
  return AtomicMeasure(std::move(atoms), std::move(weights));
}

AtomicMeasure discretize(const AtomicMeasure& theta, const SphericalPartition& partition,
                         const SupportTest& support, AtomPlacement placement) {
  const std::size_t cells = partition.size();
  std::vector<std::vector<std::size_t>> members(cells);
  for (std::size_t j = 0; j < theta.size(); ++j) members[partition.locate(theta.atom(j))].push_back(j);
  std::vector<UnitVector> atoms;
  std::vector<double> weights;
  std::vector<Fraction> fractions;
  for (std::size_t k = 0; k < cells; ++k) {
    if (members[k].empty()) continue;
    double w = 0.0;
    Fraction f(0);
    std::vector<double> mean(theta.ambient_dim(), 0.0);
    for (std::size_t j : members[k]) {
      w += theta.weight(j);
      if (theta.is_rational()) f += theta.exact_weights()[j];
      for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += theta.weight(j) * theta.atom(j)[c];
    }
    if (placement == AtomPlacement::OriginalAtom) {
      atoms.push_back(members[k].size() == 1 ? theta.atom(members[k][0]) : UnitVector(mean));
    } else {
      atoms.push_back(pick_representative(partition, k, support));
    }
    weights.push_back(w);
    fractions.push_back(f);
  }
  if (theta.is_rational()) return AtomicMeasure(std::move(atoms), std::move(fractions));
  return AtomicMeasure(std::move(atoms), std::move(weights));
}

std::optional<UnitVector> closed_hemisphere_witness(const std::vector<UnitVector>& points, double tol) {
  if (points.empty()) return std::nullopt;
  const std::size_t d = points.front().ambient_dim();
  // Coordinate directions first, last axis leading, for readable witnesses.
  for (std::size_t k = d; k-- > 0;) {
    const Eigen::VectorXd e = Eigen::VectorXd::Unit(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k));
    if (covers_all(e, points, tol)) return to_unit(e);
    if (covers_all(-e, points, tol)) return to_unit(-e);
  }
  for (const auto& u : hemisphere_candidates(points)) {
    if (covers_all(u, points, tol)) return to_unit(u);
    if (covers_all(-u, points, tol)) return to_unit(-u);
  }
  return std::nullopt;
}

HemisphereVerdict check_hemisphere_concentration(const AtomicMeasure& mu) {
  if (mu.size() == 0) throw Error(ErrorCode::InvalidArgument, "measure has no atoms");
  HemisphereVerdict v;
  v.witness = closed_hemisphere_witness(mu.atoms());
  v.concentrated = v.witness.has_value();
  return v;
}

namespace {

using Mask = std::uint32_t;

// Masses of the regions of S^m cut out by the open balls B(x_j, r), keyed by
// the set of balls covering them.
std::vector<std::pair<Mask, double>> coverage_cells(const AtomicMeasure& mu, const DensityMeasure& lambda, double r,
                                                    bool& exact) {
  const double cos_r = std::cos(r);
  auto mask_of = [&](const UnitVector& p) {
    Mask m = 0;
    for (std::size_t j = 0; j < mu.size(); ++j) {
      if (dot(p, mu.atom(j)) > cos_r) m |= Mask{1} << j;
    }
    return m;
  };
  std::vector<std::pair<Mask, double>> cells;
  if (lambda.exact_on_circle()) {
    exact = true;
    std::vector<double> cuts;
    for (const auto& x : mu.atoms()) {
      cuts.push_back(wrap_angle(x.angle() - r));
      cuts.push_back(wrap_angle(x.angle() + r));
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t k = 0; k < cuts.size(); ++k) {
      const double a = cuts[k];
      double len = (k + 1 < cuts.size() ? cuts[k + 1] : cuts[0] + 2.0 * kPi) - a;
      if (len <= 0.0) continue;
      cells.emplace_back(mask_of(UnitVector::from_angle(a + 0.5 * len)), lambda.arc_mass({a, len}));
    }
    return cells;
  }
  exact = false;
  std::unordered_map<Mask, double> acc;
  const std::size_t n = lambda.mc_samples;
  for (std::size_t b = 0; b * kBlock < n; ++b) {
    auto rng = block_engine(lambda.mc_seed, b);
    const std::size_t end = std::min(n, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) acc[mask_of(lambda.sample(rng))] += 1.0;
  }
  for (const auto& [m, c] : acc) cells.emplace_back(m, c / static_cast<double>(n));
  std::sort(cells.begin(), cells.end());
  return cells;
}

// Rank of the atoms selected by `mask`, stopping once it reaches `cap`.
std::size_t rank_of(const AtomicMeasure& mu, Mask mask, std::size_t cap) {
  std::vector<std::vector<double>> basis;
  for (std::size_t j = 0; j < mu.size() && basis.size() < cap; ++j) {
    if (!(mask >> j & 1U)) continue;
    std::vector<double> v(mu.atom(j).coords().begin(), mu.atom(j).coords().end());
    for (const auto& b : basis) {
      const double p = dot(std::span<const double>(v), std::span<const double>(b));
      for (std::size_t c = 0; c < v.size(); ++c) v[c] -= p * b[c];
    }
    const double norm = std::sqrt(dot(std::span<const double>(v), std::span<const double>(v)));
    if (norm > 1e-10) {
      for (double& c : v) c /= norm;
      basis.push_back(std::move(v));
    }
  }
  return basis.size();
}

std::vector<std::size_t> members(Mask mask) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; mask != 0; ++j, mask >>= 1) {
    if (mask & 1U) out.push_back(j);
  }
  return out;
}

WeakAleksandrovVerdict weak_exact(const AtomicMeasure& mu, const DensityMeasure& lambda, double r) {
  const std::size_t n = mu.size();
  const std::size_t d = mu.ambient_dim();
  const Mask full = n == 32 ? ~Mask{0} : (Mask{1} << n) - 1;
  const std::size_t count = std::size_t{1} << n;

  // Subsets lying in a closed hemisphere: maximal ones from the candidate
  // normals, closed downward, plus the degenerate (rank-deficient) ones.
  std::vector<char> in_hemi(count, 0);
  for (const auto& u : hemisphere_candidates(mu.atoms())) {
    for (double sign : {1.0, -1.0}) {
      Mask m = 0;
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c) s += sign * u[static_cast<Eigen::Index>(c)] * mu.atom(j)[c];
        if (s >= -1e-12) m |= Mask{1} << j;
      }
      in_hemi[m] = 1;
    }
  }
  for (std::size_t s = count; s-- > 0;) {
    if (!in_hemi[s]) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (s >> j & 1U) in_hemi[s ^ (std::size_t{1} << j)] = 1;
    }
  }

  WeakAleksandrovVerdict v;
  v.certifying = true;
  const auto cells = coverage_cells(mu, lambda, r, v.exact_integration);
  // uncovered[S] = lambda-mass of the points covered only by balls in S.
  std::vector<double> uncovered(count, 0.0);
  double total = 0.0;
  for (const auto& [m, mass] : cells) {
    uncovered[m] += mass;
    total += mass;
  }
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t bit = std::size_t{1} << j;
    for (std::size_t s = 0; s < count; ++s) {
      if (s & bit) uncovered[s] += uncovered[s ^ bit];
    }
  }
  std::vector<double> mu_mass(count, 0.0);
  for (std::size_t s = 1; s < count; ++s) {
    mu_mass[s] = mu_mass[s & (s - 1)] + mu.weight(static_cast<std::size_t>(std::countr_zero(s)));
  }

  // Smallest subsets first, then by mask value.
  for (std::size_t k = 1; k <= n; ++k) {
    Mask s = (Mask{1} << k) - 1;
    for (;;) {
      if (in_hemi[s] || k < d || rank_of(mu, s, d) < d) {
        ++v.subsets_checked;
        const double lam = total - uncovered[full & ~s];
        if (mu_mass[s] > lam + 1e-12) {
          v.holds = false;
          v.violating_subset = members(s);
          v.mu_mass = mu_mass[s];
          v.lambda_mass = lam;
          return v;
        }
      }
      if (s == full || k == n) break;
      const Mask c = s & (~s + 1);
      const Mask rr = s + c;
      s = (((rr ^ s) >> 2) / c) | rr;
      if (s > full) break;
    }
  }
  return v;
}

}  // namespace

namespace {

// lambda of the union of open balls B(x_j, r), j in `subset`.
class NeighbourhoodMass {
 public:
  NeighbourhoodMass(const AtomicMeasure& mu, const DensityMeasure& lambda, std::size_t samples, std::uint64_t seed)
      : mu_(mu), lambda_(lambda) {
    if (lambda.exact_on_circle()) return;
    auto rng = block_engine(seed, 0);
    for (std::size_t i = 0; i < samples; ++i) points_.push_back(lambda.sample(rng));
  }

  bool exact() const { return lambda_.exact_on_circle(); }

  double operator()(const std::vector<std::size_t>& subset, double r) const {
    if (exact()) {
      std::vector<Arc> arcs;
      for (std::size_t j : subset) arcs.push_back({mu_.atom(j).angle() - r, 2.0 * r});
      return measure_of(lambda_, arcs).value;
    }
    const double cos_r = std::cos(r);
    std::size_t hits = 0;
    for (const auto& p : points_) {
      for (std::size_t j : subset) {
        if (dot(p, mu_.atom(j)) > cos_r) {
          ++hits;
          break;
        }
      }
    }
    return static_cast<double>(hits) / static_cast<double>(points_.size());
  }

 private:
  const AtomicMeasure& mu_;
  const DensityMeasure& lambda_;
  std::vector<UnitVector> points_;
};

WeakAleksandrovVerdict weak_sampled(const AtomicMeasure& mu, const DensityMeasure& lambda, double r,
                                    std::size_t budget, std::uint64_t seed) {
  WeakAleksandrovVerdict v;
  const NeighbourhoodMass lam(mu, lambda, std::min<std::size_t>(lambda.mc_samples, 20'000), seed);
  v.exact_integration = lam.exact();
  auto test = [&](const std::vector<std::size_t>& subset) {
    if (subset.empty()) return true;
    ++v.subsets_checked;
    double m = 0.0;
    for (std::size_t j : subset) m += mu.weight(j);
    const double l = lam(subset, r);
    if (m > l + 1e-12) {
      v.holds = false;
      v.violating_subset = subset;
      v.mu_mass = m;
      v.lambda_mass = l;
      return false;
    }
    return true;
  };
  for (std::size_t j = 0; j < mu.size(); ++j) {
    if (!test({j})) return v;
  }
  auto rng = block_engine(seed, 1);
  for (std::size_t k = 0; k < budget; ++k) {
    const auto u = sample_uniform_sphere(mu.ambient_dim(), rng);
    std::vector<std::size_t> subset;
    for (std::size_t j = 0; j < mu.size(); ++j) {
      // Odd draws thin the hemisphere to a random subset.
      if (dot(u, mu.atom(j)) >= 0.0 && (k % 2 == 0 || uniform01(rng) < 0.5)) subset.push_back(j);
    }
    if (!test(subset)) return v;
  }
  return v;
}

}  // namespace

WeakAleksandrovVerdict check_weak_aleksandrov(const AtomicMeasure& mu, const DensityMeasure& lambda, double alpha,
                                              CheckMode mode, std::size_t budget, std::uint64_t seed) {
  if (mu.size() == 0) throw Error(ErrorCode::InvalidArgument, "measure has no atoms");
  if (mu.ambient_dim() != lambda.ambient_dim()) throw Error(ErrorCode::DimensionMismatch, "mu and lambda dimension");
  if (!(alpha > 0.0 && alpha < kPi / 4)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, pi/4)");
  const double r = kPi / 2 - 2.0 * alpha;
  if (mode == CheckMode::Exact) {
    if (mu.size() > kMaxExactAtoms) {
      throw Error(ErrorCode::TooManyAtomsForExact,
                  std::to_string(mu.size()) + " atoms exceed the exact limit of " + std::to_string(kMaxExactAtoms));
    }
    return weak_exact(mu, lambda, r);
  }
  return weak_sampled(mu, lambda, r, budget, seed);
}

AleksandrovVerdict check_aleksandrov_classical(const AtomicMeasure& mu, const DensityMeasure& lambda,
                                               std::size_t samples, std::uint64_t seed) {
  if (mu.size() == 0) throw Error(ErrorCode::InvalidArgument, "measure has no atoms");
  if (mu.ambient_dim() != lambda.ambient_dim()) throw Error(ErrorCode::DimensionMismatch, "mu and lambda dimension");
  const std::size_t n = mu.size();
  AleksandrovVerdict v;
  auto fails = [&](double m, double l) { return m >= l - 1e-12; };

  if (mu.ambient_dim() == 2) {
    // Hulls are the arcs [x_i, x_j] of length at most pi; their pi/2
    // neighbourhood is the open arc extended by pi/2 on both sides.
    const NeighbourhoodMass lam(mu, lambda, std::min<std::size_t>(lambda.mc_samples, 20'000), seed);
    v.exact = lam.exact();
    for (std::size_t i = 0; i < n; ++i) {
      const double a = mu.atom(i).angle();
      for (std::size_t j = 0; j < n; ++j) {
        const double len = wrap_angle(mu.atom(j).angle() - a);
        if (len > kPi + 1e-12) continue;
        double m = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          if (wrap_angle(mu.atom(k).angle() - a) <= len) m += mu.weight(k);
        }
        double l = 0.0;
        if (lam.exact()) {
          l = lambda.arc_mass({a - kPi / 2, std::min(len + kPi, 2 * kPi)});
        } else {
          const auto mid = UnitVector::from_angle(a + len / 2);
          l = measure_of(
                  lambda, [&](const UnitVector& p) { return dot(p, mid) > std::cos(len / 2 + kPi / 2); },
                  lambda.mc_samples, seed)
                  .value;
        }
        if (fails(m, l)) {
          v.holds = false;
          v.hull = i == j ? std::vector<std::size_t>{i} : std::vector<std::size_t>{i, j};
          v.mu_mass = m;
          v.lambda_mass = l;
          return v;
        }
      }
    }
    return v;
  }

  // Higher dimensions: hulls of at most three atoms and random caps, with
  // neighbourhood masses estimated on one fixed sample of lambda.
  auto rng = block_engine(seed, 0);
  std::vector<UnitVector> pts;
  for (std::size_t i = 0; i < std::min<std::size_t>(lambda.mc_samples, 20'000); ++i) pts.push_back(lambda.sample(rng));
  auto frac_of = [&](const std::function<bool(const UnitVector&)>& pred) {
    std::size_t h = 0;
    for (const auto& p : pts) h += pred(p) ? 1 : 0;
    return static_cast<double>(h) / static_cast<double>(pts.size());
  };
  auto check_hull = [&](const std::vector<std::size_t>& hull) {
    const auto a = as_matrix(mu.atoms(), hull).transpose().eval();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    lu.setThreshold(1e-10);
    if (lu.rank() < static_cast<Eigen::Index>(hull.size())) return true;
    double m = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      Eigen::VectorXd x(a.rows());
      for (Eigen::Index c = 0; c < a.rows(); ++c) x[c] = mu.atom(k)[static_cast<std::size_t>(c)];
      const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(x);
      if ((a * coef - x).norm() < 1e-9 && coef.minCoeff() >= -1e-12) m += mu.weight(k);
    }
    const double l = frac_of([&](const UnitVector& p) {
      for (std::size_t h : hull) {
        if (dot(p, mu.atom(h)) > 0.0) return true;
      }
      return false;
    });
    if (fails(m, l)) {
      v.holds = false;
      v.hull = hull;
      v.mu_mass = m;
      v.lambda_mass = l;
      return false;
    }
    return true;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (!check_hull({i})) return v;
  }
  const bool all_triples = n <= 40;
  auto pick = block_engine(seed, 1);
  std::uniform_int_distribution<std::size_t> any(0, n - 1);
  if (all_triples) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!check_hull({i, j})) return v;
        for (std::size_t k = j + 1; k < n; ++k) {
          if (!check_hull({i, j, k})) return v;
        }
      }
    }
  } else {
    for (std::size_t s = 0; s < samples; ++s) {
      const std::size_t i = any(pick), j = any(pick), k = any(pick);
      if (i != j && !check_hull({i, j})) return v;
      if (i != j && j != k && i != k && !check_hull({i, j, k})) return v;
    }
  }
  for (std::size_t s = 0; s < samples; ++s) {
    const auto c = sample_uniform_sphere(mu.ambient_dim(), pick);
    const double radius = uniform01(pick) * kPi / 2;
    double m = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (dot(mu.atom(k), c) >= std::cos(radius)) m += mu.weight(k);
    }
    if (m == 0.0) continue;
    const double l = lambda.exact_on_sphere2()
                         ? cap_area(3, radius + kPi / 2) / sphere_area(3)
                         : frac_of([&](const UnitVector& p) { return dot(p, c) > std::cos(radius + kPi / 2); });
    if (fails(m, l)) {
      v.holds = false;
      v.cap = Cap{c, radius};
      v.mu_mass = m;
      v.lambda_mass = l;
      return v;
    }
  }
  return v;
}

}  // namespace gip
