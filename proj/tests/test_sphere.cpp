#include <doctest.h>

#include <random>

#include "gip/sampling.hpp"
#include "gip/sphere.hpp"
#include "test_util.hpp"

using namespace gip;
using gip::test::at_deg;
using gip::test::deg;

TEST_CASE("spherical distance on the basic configurations") {
  const auto u = at_deg(37);
  CHECK(spherical_distance(u, u) == 0.0);
  CHECK(spherical_distance(u, -u) == doctest::Approx(std::numbers::pi).epsilon(1e-15));
  const auto e1 = UnitVector::axis(3, 0), e2 = UnitVector::axis(3, 1);
  CHECK(spherical_distance(e1, e2) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-15));
}

TEST_CASE("unit vectors are normalized and dimensions checked") {
  const UnitVector v({3.0, 4.0});
  CHECK(v[0] == doctest::Approx(0.6));
  CHECK(v[1] == doctest::Approx(0.8));
  CHECK_THROWS_AS(UnitVector({0.0, 0.0}), Error);
  CHECK_THROWS_AS(UnitVector({1.0}), Error);
  CHECK_THROWS_AS(spherical_distance(UnitVector::axis(2, 0), UnitVector::axis(3, 0)), Error);
}

TEST_CASE("cost values") {
  CHECK(cost_value(at_deg(10), at_deg(10)) == doctest::Approx(0.0));
  CHECK(cost_value(at_deg(0), at_deg(60)) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(cost(UnitVector::axis(2, 0), UnitVector::axis(2, 1)).is_infinite());
  CHECK(cost(at_deg(0), at_deg(135)).is_infinite());
  // Exactly orthogonal axes are past the cutoff.
  CHECK(cost(UnitVector::axis(3, 0), UnitVector::axis(3, 2)).is_infinite());
}

TEST_CASE("extended cost arithmetic") {
  const auto inf = ExtendedCost::infinite();
  CHECK((inf + ExtendedCost(2.0)).is_infinite());
  CHECK((ExtendedCost(1.5) + ExtendedCost(2.0)).value() == 3.5);
  CHECK_THROWS_AS(inf - inf, Error);
  CHECK_THROWS_AS(inf.value(), Error);
}

TEST_CASE("cost is symmetric bit for bit") {
  auto rng = block_engine(11, 0);
  for (int t = 0; t < 1000; ++t) {
    const auto a = sample_uniform_sphere(3, rng), b = sample_uniform_sphere(3, rng);
    CHECK(cost(a, b) == cost(b, a));
  }
}

TEST_CASE("cost is strictly convex and increasing in the distance") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, std::numbers::pi / 2 - 1e-3);
  const auto base = at_deg(0);
  for (int t = 0; t < 500; ++t) {
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    if (b - a < 1e-6) continue;
    const double ca = cost_value(base, UnitVector::from_angle(a));
    const double cb = cost_value(base, UnitVector::from_angle(b));
    const double cm = cost_value(base, UnitVector::from_angle(0.5 * (a + b)));
    CHECK(ca < cb);
    CHECK(cm < 0.5 * (ca + cb));
  }
}

TEST_CASE("c-transform examples") {
  const auto atoms = gip::test::circle_atoms({0, 90, 180, 270});
  const std::vector<double> zero(4, 0.0);
  const auto v = c_transform(zero, atoms, at_deg(45));
  CHECK(v.value() == doctest::Approx(std::log(std::sqrt(2.0))).epsilon(1e-12));
  CHECK(v.value() == doctest::Approx(0.346574).epsilon(1e-6));

  const std::vector<UnitVector> one{at_deg(20)};
  const std::vector<double> val{0.0};
  CHECK(c_transform(val, one, at_deg(50)).value() == doctest::Approx(-std::log(std::cos(deg(30)))));
  // Queries with no finite term are +infinity.
  CHECK(c_transform(val, one, at_deg(200)).is_infinite());

  const std::vector<double> none(4, kNegInfinity);
  CHECK_THROWS_AS(c_transform(none, atoms, at_deg(45)), Error);
}

namespace {

// f^c on a finite grid of directions, by direct minimization.
std::vector<double> transform_on(const std::vector<double>& f, const std::vector<UnitVector>& from,
                                 const std::vector<UnitVector>& to) {
  std::vector<double> out;
  for (const auto& q : to) {
    const auto v = c_transform(f, from, q);
    out.push_back(v.is_infinite() ? std::numeric_limits<double>::infinity() : v.value());
  }
  return out;
}

}  // namespace

TEST_CASE("c-transform is order reversing and idempotent after two steps") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<UnitVector> atoms, grid;
    for (int j = 0; j < 7; ++j) atoms.push_back(UnitVector::from_angle(2 * std::numbers::pi * j / 7 + 0.1 * u(rng)));
    for (int j = 0; j < 90; ++j) grid.push_back(UnitVector::from_angle(2 * std::numbers::pi * j / 90 + 0.01));
    std::vector<double> f, g;
    for (int j = 0; j < 7; ++j) {
      f.push_back(u(rng));
      g.push_back(f.back() + std::abs(u(rng)));
    }
    const auto fc = transform_on(f, atoms, grid);
    const auto gc = transform_on(g, atoms, grid);
    for (std::size_t q = 0; q < grid.size(); ++q) CHECK(fc[q] >= gc[q]);

    // Dual transform over the grid back onto the atoms, and once more.
    std::vector<double> neg_fc;
    for (double v : fc) neg_fc.push_back(std::isinf(v) ? kNegInfinity : v);
    const auto fcc = transform_on(neg_fc, grid, atoms);
    for (std::size_t j = 0; j < atoms.size(); ++j) CHECK(fcc[j] >= f[j] - 1e-9);
    std::vector<double> fcc_vals(fcc.begin(), fcc.end());
    const auto fccc = transform_on(fcc_vals, atoms, grid);
    for (std::size_t q = 0; q < grid.size(); ++q) {
      if (std::isinf(fc[q])) continue;
      CHECK(fccc[q] == doctest::Approx(fc[q]).epsilon(1e-9));
    }
  }
}
