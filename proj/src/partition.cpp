#include "gip/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gip {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kGolden = 0.6180339887498949;
constexpr double kAtomClearance = 1e-9;
constexpr std::size_t kBlock = 1 << 16;

double frac(double x) { return x - std::floor(x); }

std::size_t arc_count_for(double kappa) {
  // Smallest n with 2pi/n < kappa, at least 3 so every arc is shorter than pi.
  const auto n = static_cast<std::size_t>(std::floor(kTwoPi / kappa)) + 1;
  return std::max<std::size_t>(n, 3);
}

double arc_step(const PartitionNode& node) { return kTwoPi / static_cast<double>(node.arc_count); }

double band_sin_max(double a, double b) {
  if (a <= kPi / 2 && kPi / 2 <= b) return 1.0;
  return std::max(std::sin(a), std::sin(b));
}

// Builds the band tree of S^dim with all cells of diameter < kappa.
PartitionNode build_node(std::size_t dim, double kappa, double offset_frac, std::size_t root_arcs) {
  PartitionNode node;
  node.dim = dim;
  if (dim == 1) {
    node.arc_count = root_arcs > 0 ? root_arcs : arc_count_for(kappa);
    node.arc_offset = offset_frac * arc_step(node);
    node.cell_count = node.arc_count;
    return node;
  }
  const double kappa_band = kappa / 2.0;
  node.band_count = std::max<std::size_t>(static_cast<std::size_t>(std::floor(kPi / kappa_band)) + 1, 3);
  node.band_width = kPi / static_cast<double>(node.band_count);
  const double w = node.band_width;
  node.bands.resize(node.band_count);
  node.first_cell.resize(node.band_count);
  std::size_t next = 0;
  for (std::size_t i = 0; i < node.band_count; ++i) {
    node.first_cell[i] = next;
    if (i == 0 || i + 1 == node.band_count) {
      next += 1;
      continue;
    }
    const double a = w * static_cast<double>(i);
    const double sub_kappa = (kappa - w) / band_sin_max(a, a + w);
    node.bands[i] = build_node(dim - 1, sub_kappa, offset_frac, 0);
    next += node.bands[i].cell_count;
  }
  node.cell_count = next;
  return node;
}

std::size_t locate_in(const PartitionNode& node, std::span<const double> y) {
  if (node.dim == 1) {
    const double step = arc_step(node);
    const double rel = wrap_angle(std::atan2(y[1], y[0]) - node.arc_offset);
    if (rel == 0.0) return node.arc_count - 1;
    const auto k = static_cast<long long>(std::ceil(rel / step)) - 1;
    return static_cast<std::size_t>(std::clamp<long long>(k, 0, static_cast<long long>(node.arc_count) - 1));
  }
  const double t = std::acos(std::clamp(y[node.dim], -1.0, 1.0));
  const auto raw = static_cast<long long>(std::ceil(t / node.band_width)) - 1;
  const auto i = static_cast<std::size_t>(std::clamp<long long>(raw, 0, static_cast<long long>(node.band_count) - 1));
  if (i == 0 || i + 1 == node.band_count) return node.first_cell[i];
  std::vector<double> sub(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(node.dim));
  double norm = 0.0;
  for (double v : sub) norm += v * v;
  norm = std::sqrt(norm);
  if (norm > 0.0) {
    for (double& v : sub) v /= norm;
  } else {
    sub.assign(node.dim, 0.0);
    sub[0] = 1.0;
  }
  return node.first_cell[i] + locate_in(node.bands[i], sub);
}

// Angular distance from y to the nearest cell boundary of the tree.
double boundary_clearance(const PartitionNode& node, std::span<const double> y) {
  if (node.dim == 1) {
    const double step = arc_step(node);
    const double rel = wrap_angle(std::atan2(y[1], y[0]) - node.arc_offset);
    const double r = std::fmod(rel, step);
    return std::min(r, step - r);
  }
  const double w = node.band_width;
  const double t = std::acos(std::clamp(y[node.dim], -1.0, 1.0));
  const double k = std::clamp(std::round(t / w), 1.0, static_cast<double>(node.band_count - 1));
  double clearance = std::abs(t - k * w);
  const auto raw = static_cast<long long>(std::ceil(t / w)) - 1;
  const auto i = static_cast<std::size_t>(std::clamp<long long>(raw, 0, static_cast<long long>(node.band_count) - 1));
  if (i == 0 || i + 1 == node.band_count) return clearance;
  std::vector<double> sub(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(node.dim));
  const double s = std::sin(t);
  for (double& v : sub) v /= s;
  return std::min(clearance, s * boundary_clearance(node.bands[i], sub));
}

std::vector<double> givens_rotation(std::size_t n, std::size_t attempt) {
  std::vector<double> r(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) r[i * n + i] = 1.0;
  if (attempt == 0 || n < 3) return r;
  // Compose plane rotations (i, n-1) and (0, 1) with irrational angles.
  auto apply = [&](std::size_t p, std::size_t q, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    for (std::size_t col = 0; col < n; ++col) {
      const double a = r[p * n + col], b = r[q * n + col];
      r[p * n + col] = c * a - s * b;
      r[q * n + col] = s * a + c * b;
    }
  };
  const double k = static_cast<double>(attempt);
  for (std::size_t i = 0; i + 1 < n; ++i) apply(i, n - 1, frac(k * kGolden * (1.0 + 0.37 * i)) * 0.5);
  apply(0, 1, frac(k * kGolden * 1.41421356) * kTwoPi);
  return r;
}

std::vector<double> rotate(const std::vector<double>& r, std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<double> y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) y[i] = dot(std::span<const double>(r).subspan(i * n, n), x);
  return y;
}

double integral_sin2(double a, double b) {
  auto f = [](double t) { return t / 2.0 - std::sin(2.0 * t) / 4.0; };
  return f(b) - f(a);
}

double integral_sin_cos(double a, double b) {
  auto f = [](double t) { return std::sin(t) * std::sin(t) / 2.0; };
  return f(b) - f(a);
}

}  // namespace

struct PartitionBuilder {
  static SphericalPartition geometry(std::size_t m, double kappa, std::size_t attempt, std::size_t root_arcs);
  static void enumerate(SphericalPartition& p, const PartitionNode& node, std::vector<std::size_t>& path,
                        std::vector<std::pair<double, double>>& colat);
  static UnitVector centroid(const SphericalPartition& p, const SphericalCell& cell);
  static void assign(SphericalPartition& p, std::vector<double> masses, std::optional<std::vector<Fraction>> exact);
  static void rationalize(SphericalPartition& p, std::int64_t denominator);
  static double clearance(const SphericalPartition& p, const UnitVector& x);
};

namespace {

double cell_diameter(const SphericalCell& cell) {
  const auto& c = cell.colatitude;
  std::size_t levels = c.size();
  double d = 0.0;
  if (cell.is_cap) {
    d = 2.0 * (c.back().second - c.back().first);
    --levels;
  } else {
    d = cell.azimuth.second - cell.azimuth.first;
  }
  for (std::size_t j = levels; j-- > 0;) {
    d = (c[j].second - c[j].first) + band_sin_max(c[j].first, c[j].second) * d;
  }
  return std::min(d, kPi);
}

}  // namespace

void PartitionBuilder::enumerate(SphericalPartition& p, const PartitionNode& node, std::vector<std::size_t>& path,
                                 std::vector<std::pair<double, double>>& colat) {
  if (node.dim == 1) {
    const double step = arc_step(node);
    for (std::size_t k = 0; k < node.arc_count; ++k) {
      SphericalCell cell;
      cell.path = path;
      cell.path.push_back(k);
      cell.colatitude = colat;
      const double lo = node.arc_offset + step * static_cast<double>(k);
      cell.azimuth = {lo, lo + step};
      p.cells_.push_back(std::move(cell));
    }
    return;
  }
  const double w = node.band_width;
  for (std::size_t i = 0; i < node.band_count; ++i) {
    path.push_back(i);
    const double a = w * static_cast<double>(i);
    colat.emplace_back(a, i + 1 == node.band_count ? kPi : a + w);
    if (i == 0 || i + 1 == node.band_count) {
      SphericalCell cell;
      cell.path = path;
      cell.colatitude = colat;
      cell.is_cap = true;
      p.cells_.push_back(std::move(cell));
    } else {
      enumerate(p, node.bands[i], path, colat);
    }
    colat.pop_back();
    path.pop_back();
  }
}

UnitVector PartitionBuilder::centroid(const SphericalPartition& p, const SphericalCell& cell) {
  std::vector<double> t;
  for (const auto& [a, b] : cell.colatitude) t.push_back(0.5 * (a + b));
  if (cell.is_cap) {
    t.back() = cell.colatitude.back().first == 0.0 ? 0.0 : kPi;
    std::vector<double> tail(p.ambient_dim() - t.size(), 0.0);
    tail[0] = 1.0;
    return p.from_local(t, std::move(tail));
  }
  const auto [lo, hi] = cell.azimuth;
  const double mid = 0.5 * (lo + hi);
  if (!t.empty()) {
    // Exact centroid direction of the innermost band-by-arc piece of S^2.
    const auto [a, b] = cell.colatitude.back();
    const double horizontal = integral_sin2(a, b) * 2.0 * std::sin(0.5 * (hi - lo));
    const double vertical = integral_sin_cos(a, b) * (hi - lo);
    t.back() = std::atan2(horizontal, vertical);
  }
  return p.from_local(t, {std::cos(mid), std::sin(mid)});
}

SphericalPartition PartitionBuilder::geometry(std::size_t m, double kappa, std::size_t attempt,
                                              std::size_t root_arcs) {
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "sphere dimension must be >= 1");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw Error(ErrorCode::InvalidArgument, "scale must be positive");
  SphericalPartition p;
  p.scale_ = kappa;
  p.attempt_ = attempt;
  p.rotation_ = givens_rotation(m + 1, attempt);
  const double offset = attempt == 0 ? 0.0 : frac(static_cast<double>(attempt) * kGolden);
  p.root_ = build_node(m, kappa, offset, root_arcs);
  std::vector<std::size_t> path;
  std::vector<std::pair<double, double>> colat;
  enumerate(p, p.root_, path, colat);
  for (auto& cell : p.cells_) {
    cell.diameter = cell_diameter(cell);
    cell.representative = centroid(p, cell);
  }
  return p;
}

void PartitionBuilder::assign(SphericalPartition& p, std::vector<double> masses,
                              std::optional<std::vector<Fraction>> exact) {
  p.masses_ = std::move(masses);
  p.exact_masses_ = std::move(exact);
}

void PartitionBuilder::rationalize(SphericalPartition& p, std::int64_t denominator) {
  if (denominator <= 0) throw Error(ErrorCode::InvalidArgument, "rationalization needs a positive denominator");
  double perturbation = 0.0;
  const auto units = round_to_units(*p.masses_, denominator, &perturbation);
  std::vector<Fraction> exact;
  std::vector<double> rounded;
  for (auto u : units) {
    exact.emplace_back(u, denominator);
    rounded.push_back(static_cast<double>(u) / static_cast<double>(denominator));
  }
  p.perturbation_ = perturbation;
  p.denominator_ = denominator;
  assign(p, std::move(rounded), std::move(exact));
}

double PartitionBuilder::clearance(const SphericalPartition& p, const UnitVector& x) {
  return boundary_clearance(p.root_, rotate(p.rotation_, x.coords()));
}

const std::vector<double>& SphericalPartition::masses() const {
  if (!masses_) throw Error(ErrorCode::InvalidArgument, "partition carries no masses");
  return *masses_;
}

const std::vector<Fraction>& SphericalPartition::exact_masses() const {
  if (!exact_masses_) throw Error(ErrorCode::InvalidArgument, "partition carries no exact masses");
  return *exact_masses_;
}

std::size_t SphericalPartition::locate(const UnitVector& x) const {
  if (x.ambient_dim() != ambient_dim()) throw Error(ErrorCode::DimensionMismatch, "point and partition dimension");
  return locate_in(root_, rotate(rotation_, x.coords()));
}

UnitVector SphericalPartition::from_local(const std::vector<double>& colatitudes, std::vector<double> tail) const {
  std::vector<double> y = std::move(tail);
  for (std::size_t j = colatitudes.size(); j-- > 0;) {
    const double s = std::sin(colatitudes[j]);
    for (double& v : y) v *= s;
    y.push_back(std::cos(colatitudes[j]));
  }
  if (y.size() != ambient_dim()) throw Error(ErrorCode::DimensionMismatch, "local coordinates do not match");
  // Rotation is orthogonal: ambient = R^T y.
  const std::size_t n = y.size();
  std::vector<double> x(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) x[i] += rotation_[k * n + i] * y[k];
  }
  return UnitVector(std::move(x));
}

SphericalPartition build_partition(std::size_t m, double kappa) { return PartitionBuilder::geometry(m, kappa, 0, 0); }

SphericalPartition build_partition(std::size_t m, double kappa, const DensityMeasure& theta,
                                   const PartitionOptions& options) {
  if (theta.ambient_dim() != m + 1) throw Error(ErrorCode::DimensionMismatch, "measure and sphere dimension");
  std::size_t root_arcs = 0;
  if (m == 1 && options.rationalize && theta.family() == DensityFamily::Uniform && options.denominator > 0) {
    // Uniform circle: pick an arc count dividing the denominator so the
    // rounded masses are exact.
    const auto d = static_cast<std::size_t>(options.denominator);
    for (std::size_t n = arc_count_for(kappa); n <= d; ++n) {
      if (d % n == 0) {
        root_arcs = n;
        break;
      }
    }
  }
  auto p = PartitionBuilder::geometry(m, kappa, 0, root_arcs);
  PartitionBuilder::assign(p, cell_masses(p, theta), std::nullopt);
  if (options.rationalize) PartitionBuilder::rationalize(p, options.denominator);
  return p;
}

SphericalPartition build_partition(std::size_t m, double kappa, const AtomicMeasure& theta,
                                   const PartitionOptions& options) {
  if (options.rationalize) {
    throw Error(ErrorCode::NotAbsolutelyContinuous, "cannot rationalize cell masses of an atomic measure");
  }
  if (theta.ambient_dim() != m + 1) throw Error(ErrorCode::DimensionMismatch, "measure and sphere dimension");
  for (std::size_t attempt = 0; attempt < std::max<std::size_t>(options.max_offset_attempts, 1); ++attempt) {
    auto p = PartitionBuilder::geometry(m, kappa, attempt, 0);
    bool clear = true;
    for (const auto& x : theta.atoms()) {
      if (PartitionBuilder::clearance(p, x) < kAtomClearance) {
        clear = false;
        break;
      }
    }
    if (!clear) continue;
    std::vector<double> masses(p.size(), 0.0);
    std::optional<std::vector<Fraction>> exact;
    if (theta.is_rational()) exact.emplace(p.size(), Fraction(0));
    for (std::size_t j = 0; j < theta.size(); ++j) {
      const std::size_t k = p.locate(theta.atom(j));
      masses[k] += theta.weight(j);
      if (exact) (*exact)[k] += theta.exact_weights()[j];
    }
    PartitionBuilder::assign(p, std::move(masses), std::move(exact));
    return p;
  }
  throw Error(ErrorCode::InvalidArgument, "no boundary offset keeps the atoms off cell boundaries");
}

std::vector<double> cell_masses(const SphericalPartition& p, const DensityMeasure& theta) {
  if (theta.ambient_dim() != p.ambient_dim()) throw Error(ErrorCode::DimensionMismatch, "measure and partition dimension");
  std::vector<double> masses(p.size(), 0.0);
  if (theta.exact_on_circle()) {
    for (std::size_t k = 0; k < p.size(); ++k) {
      const auto [lo, hi] = p.cell(k).azimuth;
      masses[k] = theta.arc_mass({lo, hi - lo});
    }
  } else if (theta.exact_on_sphere2()) {
    for (std::size_t k = 0; k < p.size(); ++k) {
      const auto& cell = p.cell(k);
      const auto [a, b] = cell.colatitude.back();
      const double zone = std::cos(a) - std::cos(b);
      masses[k] = cell.is_cap ? zone * kTwoPi : zone * (cell.azimuth.second - cell.azimuth.first);
      masses[k] /= sphere_area(3);
    }
  } else {
    const std::size_t n = theta.mc_samples;
    for (std::size_t b = 0; b * kBlock < n; ++b) {
      auto rng = block_engine(theta.mc_seed, b);
      const std::size_t end = std::min(n, (b + 1) * kBlock);
      for (std::size_t i = b * kBlock; i < end; ++i) masses[p.locate(theta.sample(rng))] += 1.0;
    }
    for (double& v : masses) v /= static_cast<double>(n);
  }
  return masses;
}

std::size_t locate(const SphericalPartition& partition, const UnitVector& x) { return partition.locate(x); }

UnitVector sample_in_cell(const SphericalPartition& partition, std::size_t index, std::mt19937_64& rng) {
  const auto& cell = partition.cell(index);
  const std::size_t m = partition.dim();
  std::vector<double> t;
  for (std::size_t j = 0; j < cell.colatitude.size(); ++j) {
    const auto [a, b] = cell.colatitude[j];
    const std::size_t level_dim = m - j;
    if (level_dim == 2) {
      // Area-uniform on S^2: cos t is uniform.
      const double u = uniform01(rng);
      t.push_back(std::acos(std::clamp(std::cos(a) + u * (std::cos(b) - std::cos(a)), -1.0, 1.0)));
      continue;
    }
    const double smax = band_sin_max(a, b);
    for (;;) {
      const double cand = a + (b - a) * uniform01(rng);
      if (uniform01(rng) <= std::pow(std::sin(cand) / smax, static_cast<double>(level_dim - 1))) {
        t.push_back(cand);
        break;
      }
    }
  }
  if (cell.is_cap) {
    const auto tail = sample_uniform_sphere(partition.ambient_dim() - t.size(), rng);
    return partition.from_local(t, {tail.coords().begin(), tail.coords().end()});
  }
  const double phi = cell.azimuth.first + (cell.azimuth.second - cell.azimuth.first) * uniform01(rng);
  return partition.from_local(t, {std::cos(phi), std::sin(phi)});
}

UnitVector pick_representative(const SphericalPartition& partition, std::size_t cell, const SupportTest& support,
                               std::size_t budget, std::uint64_t seed) {
  const auto& rep = partition.cell(cell).representative;
  if (!support || support(rep)) return rep;
  auto rng = block_engine(seed, cell);
  for (std::size_t k = 0; k < budget; ++k) {
    auto x = sample_in_cell(partition, cell, rng);
    if (support(x)) return x;
  }
  throw Error(ErrorCode::RepresentativeNotFound, "no admissible point found in cell " + std::to_string(cell));
}

}  // namespace gip
