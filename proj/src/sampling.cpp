#include "gip/sampling.hpp"

#include <cmath>
#include <numbers>

namespace gip {

std::mt19937_64 block_engine(std::uint64_t seed, std::uint64_t block) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
                    0x9E3779B9u};
  return std::mt19937_64(seq);
}

double uniform01(std::mt19937_64& rng) {
  // 53 random bits -> [0, 1).
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

namespace {

double standard_normal(std::mt19937_64& rng) {
  // Box-Muller on our own uniforms keeps streams identical across standard libraries.
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

UnitVector sample_uniform_sphere(std::size_t ambient_dim, std::mt19937_64& rng) {
  if (ambient_dim == 2) return UnitVector::from_angle(2.0 * std::numbers::pi * uniform01(rng));
  if (ambient_dim == 3) {
    const double z = 2.0 * uniform01(rng) - 1.0;
    const double phi = 2.0 * std::numbers::pi * uniform01(rng);
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    return UnitVector(std::vector<double>{s * std::cos(phi), s * std::sin(phi), z});
  }
  for (;;) {
    std::vector<double> c(ambient_dim);
    double n2 = 0.0;
    for (double& v : c) {
      v = standard_normal(rng);
      n2 += v * v;
    }
    if (n2 > 1e-20) return UnitVector(std::move(c));
  }
}

std::pair<UnitVector, UnitVector> tangent_frame(const UnitVector& pole) {
  // Pick the axis least aligned with the pole and Gram-Schmidt it.
  std::size_t k = 0;
  for (std::size_t i = 1; i < 3; ++i) {
    if (std::abs(pole[i]) < std::abs(pole[k])) k = i;
  }
  std::vector<double> a(3, 0.0);
  a[k] = 1.0;
  const double d = a[k] * pole[k];
  for (std::size_t i = 0; i < 3; ++i) a[i] -= d * pole[i];
  UnitVector e1(a);
  std::vector<double> b{pole[1] * e1[2] - pole[2] * e1[1], pole[2] * e1[0] - pole[0] * e1[2],
                        pole[0] * e1[1] - pole[1] * e1[0]};
  return {e1, UnitVector(b)};
}

UnitVector sample_uniform_cap(const UnitVector& center, double radius, std::mt19937_64& rng) {
  if (center.ambient_dim() == 2) {
    const double t = center.angle() + (2.0 * uniform01(rng) - 1.0) * radius;
    return UnitVector::from_angle(t);
  }
  if (center.ambient_dim() == 3) {
    const double cos_r = std::cos(radius);
    const double z = 1.0 - uniform01(rng) * (1.0 - cos_r);
    const double phi = 2.0 * std::numbers::pi * uniform01(rng);
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    const auto [e1, e2] = tangent_frame(center);
    std::vector<double> c(3);
    for (std::size_t i = 0; i < 3; ++i) {
      c[i] = z * center[i] + s * (std::cos(phi) * e1[i] + std::sin(phi) * e2[i]);
    }
    return UnitVector(std::move(c));
  }
  const double cos_r = std::cos(radius);
  for (;;) {
    auto u = sample_uniform_sphere(center.ambient_dim(), rng);
    if (dot(u, center) >= cos_r) return u;
  }
}

}  // namespace gip
