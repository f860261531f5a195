#include "gip/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace gip {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kBlock = 1 << 16;

// Splits an arc into at most two non-wrapping intervals inside [0, 2pi).
void split_arc(const Arc& a, std::vector<std::pair<double, double>>& out) {
  if (a.length <= 0.0) return;
  if (a.length >= kTwoPi) {
    out.emplace_back(0.0, kTwoPi);
    return;
  }
  const double s = wrap_angle(a.start);
  const double e = s + a.length;
  if (e <= kTwoPi) {
    out.emplace_back(s, e);
  } else {
    out.emplace_back(s, kTwoPi);
    out.emplace_back(0.0, e - kTwoPi);
  }
}

}  // namespace

// ---------------------------------------------------------------- atomic

AtomicMeasure::AtomicMeasure(std::vector<UnitVector> atoms, std::vector<double> weights)
    : atoms_(std::move(atoms)), weights_(std::move(weights)) {
  total_ = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  validate();
}

AtomicMeasure::AtomicMeasure(std::vector<UnitVector> atoms, std::vector<Fraction> weights)
    : atoms_(std::move(atoms)), exact_(std::move(weights)) {
  weights_.reserve(exact_->size());
  Fraction sum(0);
  for (const auto& f : *exact_) {
    weights_.push_back(to_double(f));
    sum += f;
  }
  total_ = to_double(sum);
  validate();
}

void AtomicMeasure::validate() const {
  if (atoms_.size() != weights_.size()) {
    throw Error(ErrorCode::InvalidArgument, "atomic measure needs one weight per atom");
  }
  for (std::size_t j = 0; j < atoms_.size(); ++j) {
    if (!(weights_[j] > 0.0)) throw Error(ErrorCode::InvalidArgument, "atomic weights must be positive");
    if (atoms_[j].ambient_dim() != atoms_.front().ambient_dim()) {
      throw Error(ErrorCode::DimensionMismatch, "atoms of mixed dimension");
    }
  }
  // Near-duplicates have nearby projections on a generic unit axis, so a
  // sweep along that axis only compares atoms inside a thin slab.
  constexpr double kDuplicate = 1e-12;
  std::vector<double> axis;
  double norm = 0.0;
  for (std::size_t i = 0; i < (atoms_.empty() ? 0 : atoms_.front().ambient_dim()); ++i) {
    axis.push_back(std::sqrt(static_cast<double>(i) + 2.0));
    norm += axis.back() * axis.back();
  }
  for (double& a : axis) a /= std::sqrt(norm);
  std::vector<std::pair<double, std::size_t>> along;
  for (std::size_t j = 0; j < atoms_.size(); ++j) {
    double t = 0.0;
    for (std::size_t i = 0; i < axis.size(); ++i) t += axis[i] * atoms_[j][i];
    along.emplace_back(t, j);
  }
  std::sort(along.begin(), along.end());
  for (std::size_t a = 0; a < along.size(); ++a) {
    for (std::size_t b = a + 1; b < along.size() && along[b].first - along[a].first <= kDuplicate; ++b) {
      double d2 = 0.0;
      for (std::size_t i = 0; i < axis.size(); ++i) {
        const double d = atoms_[along[a].second][i] - atoms_[along[b].second][i];
        d2 += d * d;
      }
      if (std::sqrt(d2) <= kDuplicate) throw Error(ErrorCode::InvalidArgument, "duplicate atoms");
    }
  }
}

const std::vector<Fraction>& AtomicMeasure::exact_weights() const {
  if (!exact_) throw Error(ErrorCode::InvalidArgument, "measure has no rational weights");
  return *exact_;
}

AtomicMeasure AtomicMeasure::permuted(std::span<const std::size_t> perm) const {
  std::vector<UnitVector> atoms;
  for (auto k : perm) atoms.push_back(atoms_.at(k));
  if (exact_) {
    std::vector<Fraction> w;
    for (auto k : perm) w.push_back(exact_->at(k));
    return AtomicMeasure(std::move(atoms), std::move(w));
  }
  std::vector<double> w;
  for (auto k : perm) w.push_back(weights_.at(k));
  return AtomicMeasure(std::move(atoms), std::move(w));
}

// ---------------------------------------------------------------- arcs

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a -= kTwoPi;
  return a;
}

std::vector<Arc> arc_union(std::vector<Arc> arcs) {
  std::vector<std::pair<double, double>> iv;
  for (const auto& a : arcs) split_arc(a, iv);
  std::sort(iv.begin(), iv.end());
  std::vector<Arc> out;
  for (const auto& [s, e] : iv) {
    if (!out.empty() && s <= out.back().start + out.back().length) {
      out.back().length = std::max(out.back().length, e - out.back().start);
    } else {
      out.push_back({s, e - s});
    }
  }
  return out;
}

double arc_overlap(const Arc& a, const Arc& b) {
  std::vector<std::pair<double, double>> ia, ib;
  split_arc(a, ia);
  split_arc(b, ib);
  double total = 0.0;
  for (const auto& [s1, e1] : ia) {
    for (const auto& [s2, e2] : ib) total += std::max(0.0, std::min(e1, e2) - std::max(s1, s2));
  }
  return total;
}

double sphere_area(std::size_t ambient_dim) {
  const double n = static_cast<double>(ambient_dim);
  return 2.0 * std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0);
}

double cap_area(std::size_t ambient_dim, double r) {
  r = std::clamp(r, 0.0, std::numbers::pi);
  if (ambient_dim == 2) return 2.0 * r;
  if (ambient_dim == 3) return kTwoPi * (1.0 - std::cos(r));
  // Area of S^{m-1} times the integral of sin^{m-1}, by Simpson's rule.
  const std::size_t m = ambient_dim - 1;
  const int steps = 2000;
  const double h = r / steps;
  double s = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * std::pow(std::sin(i * h), static_cast<double>(m - 1));
  }
  return sphere_area(m) * s * h / 3.0;
}

// ---------------------------------------------------------------- density

std::string to_string(DensityFamily f) {
  switch (f) {
    case DensityFamily::Uniform: return "uniform";
    case DensityFamily::Caps: return "cap";
    case DensityFamily::PiecewiseArcs: return "piecewise";
    case DensityFamily::Custom: return "custom";
  }
  return "unknown";
}

DensityMeasure DensityMeasure::uniform(std::size_t ambient_dim) {
  if (ambient_dim < 2) throw Error(ErrorCode::InvalidArgument, "sphere dimension must be >= 1");
  DensityMeasure m;
  m.family_ = DensityFamily::Uniform;
  m.ambient_dim_ = ambient_dim;
  m.support_area_ = sphere_area(ambient_dim);
  if (ambient_dim == 2) m.pieces_ = {{0.0, kTwoPi, 1.0 / kTwoPi}};
  return m;
}

DensityMeasure DensityMeasure::caps(std::vector<Cap> caps) {
  if (caps.empty()) throw Error(ErrorCode::InvalidArgument, "cap family needs at least one cap");
  DensityMeasure m;
  m.family_ = DensityFamily::Caps;
  m.ambient_dim_ = caps.front().center.ambient_dim();
  for (const auto& c : caps) {
    if (c.center.ambient_dim() != m.ambient_dim_) throw Error(ErrorCode::DimensionMismatch, "caps of mixed dimension");
    if (!(c.radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "cap radius must be positive");
  }
  m.caps_ = std::move(caps);
  if (m.ambient_dim_ == 2) {
    std::vector<Arc> arcs;
    for (const auto& c : m.caps_) arcs.push_back({c.center.angle() - c.radius, 2.0 * c.radius});
    const auto u = arc_union(std::move(arcs));
    double len = 0.0;
    for (const auto& a : u) len += a.length;
    for (const auto& a : u) m.pieces_.push_back({a.start, a.length, 1.0 / len});
    m.support_area_ = len;
    return m;
  }
  bool disjoint = true;
  for (std::size_t a = 0; a < m.caps_.size(); ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      if (spherical_distance(m.caps_[a].center, m.caps_[b].center) < m.caps_[a].radius + m.caps_[b].radius) {
        disjoint = false;
      }
    }
  }
  for (const auto& c : m.caps_) m.cap_sample_weights_.push_back(cap_area(m.ambient_dim_, c.radius));
  if (disjoint) {
    m.support_area_ = std::accumulate(m.cap_sample_weights_.begin(), m.cap_sample_weights_.end(), 0.0);
  } else {
    // Overlapping caps: area of the union by Monte Carlo over the sphere.
    const std::size_t n = 1'000'000;
    std::size_t hits = 0;
    for (std::size_t b = 0; b * kBlock < n; ++b) {
      auto rng = block_engine(kDefaultSeed, b);
      for (std::size_t i = b * kBlock; i < std::min(n, (b + 1) * kBlock); ++i) {
        if (m.in_support(sample_uniform_sphere(m.ambient_dim_, rng))) ++hits;
      }
    }
    m.support_area_ = sphere_area(m.ambient_dim_) * static_cast<double>(hits) / static_cast<double>(n);
  }
  return m;
}

DensityMeasure DensityMeasure::piecewise_arcs(std::vector<WeightedArc> arcs) {
  DensityMeasure m;
  m.family_ = DensityFamily::PiecewiseArcs;
  m.ambient_dim_ = 2;
  double mass = 0.0;
  for (const auto& a : arcs) {
    if (a.density < 0.0 || a.length < 0.0) throw Error(ErrorCode::InvalidArgument, "negative arc density");
    mass += a.length * a.density;
  }
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      if (arc_overlap({arcs[a].start, arcs[a].length}, {arcs[b].start, arcs[b].length}) > 1e-15) {
        throw Error(ErrorCode::InvalidArgument, "piecewise arcs overlap");
      }
    }
  }
  if (!(mass > 0.0)) throw Error(ErrorCode::InvalidArgument, "piecewise density has zero mass");
  for (auto& a : arcs) {
    if (a.density > 0.0 && a.length > 0.0) {
      m.pieces_.push_back({wrap_angle(a.start), a.length, a.density / mass});
      m.support_area_ += a.length;
    }
  }
  return m;
}

DensityMeasure DensityMeasure::custom(std::size_t ambient_dim, std::function<double(const UnitVector&)> density,
                                      double bound) {
  DensityMeasure m;
  m.family_ = DensityFamily::Custom;
  m.ambient_dim_ = ambient_dim;
  m.custom_density_ = std::move(density);
  m.custom_bound_ = bound;
  m.support_area_ = sphere_area(ambient_dim);
  return m;
}

const std::vector<WeightedArc>& DensityMeasure::circle_pieces() const {
  if (!exact_on_circle()) throw Error(ErrorCode::InvalidArgument, "no closed-form arc pieces for this measure");
  return pieces_;
}

double DensityMeasure::density(const UnitVector& x) const {
  switch (family_) {
    case DensityFamily::Uniform: return 1.0 / support_area_;
    case DensityFamily::Caps: return in_support(x) ? 1.0 / support_area_ : 0.0;
    case DensityFamily::PiecewiseArcs: {
      const double t = x.angle();
      for (const auto& p : pieces_) {
        if (wrap_angle(t - p.start) < p.length) return p.density;
      }
      return 0.0;
    }
    case DensityFamily::Custom: return custom_density_(x);
  }
  return 0.0;
}

bool DensityMeasure::in_support(const UnitVector& x) const {
  switch (family_) {
    case DensityFamily::Uniform: return true;
    case DensityFamily::Caps:
      for (const auto& c : caps_) {
        if (dot(x, c.center) >= std::cos(c.radius)) return true;
      }
      return false;
    case DensityFamily::PiecewiseArcs:
    case DensityFamily::Custom: return density(x) > 0.0;
  }
  return false;
}

double DensityMeasure::arc_mass(const Arc& arc) const {
  double mass = 0.0;
  for (const auto& p : circle_pieces()) mass += p.density * arc_overlap(arc, {p.start, p.length});
  return mass;
}

UnitVector DensityMeasure::sample(std::mt19937_64& rng) const {
  if (exact_on_circle() && family_ != DensityFamily::Uniform) {
    double u = uniform01(rng);
    for (const auto& p : pieces_) {
      const double w = p.density * p.length;
      if (u < w || &p == &pieces_.back()) {
        const double frac = std::clamp(u / w, 0.0, 1.0);
        return UnitVector::from_angle(p.start + frac * p.length);
      }
      u -= w;
    }
  }
  switch (family_) {
    case DensityFamily::Uniform: return sample_uniform_sphere(ambient_dim_, rng);
    case DensityFamily::Caps: {
      const double total = std::accumulate(cap_sample_weights_.begin(), cap_sample_weights_.end(), 0.0);
      for (;;) {
        double u = uniform01(rng) * total;
        std::size_t k = 0;
        while (k + 1 < caps_.size() && u >= cap_sample_weights_[k]) u -= cap_sample_weights_[k++];
        auto x = sample_uniform_cap(caps_[k].center, caps_[k].radius, rng);
        // Thin overlaps so the union is sampled uniformly.
        std::size_t cover = 0;
        for (const auto& c : caps_) cover += dot(x, c.center) >= std::cos(c.radius) ? 1 : 0;
        if (cover <= 1 || uniform01(rng) * static_cast<double>(cover) < 1.0) return x;
      }
    }
    case DensityFamily::Custom:
      for (;;) {
        auto x = sample_uniform_sphere(ambient_dim_, rng);
        if (uniform01(rng) * custom_bound_ < custom_density_(x)) return x;
      }
    case DensityFamily::PiecewiseArcs: break;
  }
  throw Error(ErrorCode::InvalidArgument, "cannot sample this measure");
}

// ---------------------------------------------------------------- measure_of

MassEstimate measure_of(const DensityMeasure& lambda, const std::vector<Arc>& region) {
  double mass = 0.0;
  for (const auto& a : arc_union(region)) mass += lambda.arc_mass(a);
  return {mass, 0.0, true};
}

MassEstimate measure_of(const DensityMeasure& lambda, const Cap& cap) {
  if (lambda.exact_on_circle()) {
    return measure_of(lambda, std::vector<Arc>{{cap.center.angle() - cap.radius, 2.0 * cap.radius}});
  }
  if (lambda.exact_on_sphere2()) {
    return {cap_area(3, cap.radius) / sphere_area(3), 0.0, true};
  }
  const double cos_r = std::cos(cap.radius);
  return measure_of(
      lambda, [&](const UnitVector& x) { return dot(x, cap.center) >= cos_r; }, lambda.mc_samples,
      lambda.mc_seed);
}

MassEstimate measure_of(const DensityMeasure& lambda, const std::function<bool(const UnitVector&)>& region,
                        std::size_t samples, std::uint64_t seed) {
  std::size_t hits = 0;
  for (std::size_t b = 0; b * kBlock < samples; ++b) {
    auto rng = block_engine(seed, b);
    const std::size_t end = std::min(samples, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      if (region(lambda.sample(rng))) ++hits;
    }
  }
  const double n = static_cast<double>(samples);
  const double p = static_cast<double>(hits) / n;
  return {p, std::sqrt(std::max(p * (1.0 - p), 0.0) / n), false};
}

}  // namespace gip
