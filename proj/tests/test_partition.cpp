#include <doctest.h>

#include <numeric>

#include "gip/partition.hpp"
#include "gip/sampling.hpp"
#include "test_util.hpp"

using namespace gip;
using gip::test::deg;

namespace {

// Largest distance over sampled pairs of members, the independent diameter oracle.
double sampled_diameter(const SphericalPartition& p, std::size_t cell, std::size_t pairs, std::uint64_t seed) {
  auto rng = block_engine(seed, cell);
  double worst = 0.0;
  for (std::size_t t = 0; t < pairs; ++t) {
    const auto a = sample_in_cell(p, cell, rng), b = sample_in_cell(p, cell, rng);
    worst = std::max(worst, spherical_distance(a, b));
  }
  return worst;
}

}  // namespace

TEST_CASE("circle partition at a quarter turn has five equal arcs") {
  const auto lambda = DensityMeasure::uniform(2);
  const auto p = build_partition(1, std::numbers::pi / 2, lambda);
  REQUIRE(p.size() == 5);
  for (std::size_t c = 0; c < 5; ++c) {
    CHECK(p.masses()[c] == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(p.cell(c).diameter == doctest::Approx(2 * std::numbers::pi / 5));
    CHECK(p.cell(c).diameter < std::numbers::pi / 2);
  }
}

TEST_CASE("rationalized circle partition with denominator 8") {
  PartitionOptions options;
  options.rationalize = true;
  options.denominator = 8;
  const auto p = build_partition(1, std::numbers::pi / 3, DensityMeasure::uniform(2), options);
  REQUIRE(p.size() == 8);
  Fraction total(0);
  for (const auto& m : p.exact_masses()) {
    CHECK(m == Fraction(1, 8));
    total += m;
  }
  CHECK(total == Fraction(1));
  CHECK(p.rounding_perturbation() == 0.0);
}

TEST_CASE("rational masses sum to one for a cap-restricted density") {
  PartitionOptions options;
  options.rationalize = true;
  options.denominator = 1000;
  const auto lambda = DensityMeasure::caps({Cap{gip::test::at_deg(30), deg(50)}});
  const auto p = build_partition(1, deg(20), lambda, options);
  const auto total = std::accumulate(p.exact_masses().begin(), p.exact_masses().end(), Fraction(0));
  CHECK(total == Fraction(1));
  for (const auto& m : p.exact_masses()) CHECK(m.denominator() <= 1000);
}

TEST_CASE("two-sphere partition cells are smaller than the scale") {
  const double kappa = std::numbers::pi / 4;
  const auto p = build_partition(2, kappa, DensityMeasure::uniform(3));
  CHECK(p.size() > 10);
  const double total = std::accumulate(p.masses().begin(), p.masses().end(), 0.0);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t c = 0; c < p.size(); ++c) {
    CHECK(p.cell(c).diameter < kappa);
    CHECK(sampled_diameter(p, c, 10'000, 7) < kappa);
  }
}

TEST_CASE("three-sphere partition respects the diameter bound") {
  const double kappa = std::numbers::pi / 2;
  const auto p = build_partition(3, kappa);
  for (std::size_t c = 0; c < p.size(); ++c) CHECK(sampled_diameter(p, c, 2'000, 9) < kappa);
}

TEST_CASE("locate finds the cap for the pole and the owning side at boundaries") {
  const auto p = build_partition(2, std::numbers::pi / 4);
  REQUIRE(p.offset_attempt() == 0);
  const auto north = p.from_local({0.0}, {1.0, 0.0});
  const auto c = p.locate(north);
  CHECK(p.cell(c).is_cap);
  CHECK(p.cell(c).colatitude.front().first == 0.0);

  // On S^1 the arcs are (a, b]; the shared endpoint belongs to the lower arc.
  const auto circle = build_partition(1, std::numbers::pi / 2);
  const double step = 2 * std::numbers::pi / 5;
  const auto edge = UnitVector::from_angle(circle.root().arc_offset + step);
  const auto owner = circle.locate(edge);
  const auto inside = circle.locate(UnitVector::from_angle(circle.root().arc_offset + 0.5 * step));
  CHECK(owner == inside);
}

TEST_CASE("uniform samples land in exactly one cell with the right frequencies") {
  const auto lambda = DensityMeasure::uniform(3);
  const auto p = build_partition(2, std::numbers::pi / 3, lambda);
  std::vector<double> hits(p.size(), 0.0);
  auto rng = block_engine(21, 0);
  const std::size_t n = 100'000;
  for (std::size_t t = 0; t < n; ++t) {
    const auto x = sample_uniform_sphere(3, rng);
    const auto c = p.locate(x);
    REQUIRE(c < p.size());
    hits[c] += 1.0;
  }
  for (std::size_t c = 0; c < p.size(); ++c) {
    const double m = p.masses()[c];
    const double sigma = std::sqrt(m * (1 - m) / n);
    CHECK(std::abs(hits[c] / n - m) < 5 * sigma + 1e-12);
  }
  // Points drawn inside a cell locate back to that cell.
  for (std::size_t c = 0; c < p.size(); ++c) {
    auto cell_rng = block_engine(22, c);
    for (int t = 0; t < 50; ++t) CHECK(p.locate(sample_in_cell(p, c, cell_rng)) == c);
  }
}

TEST_CASE("representatives") {
  const auto p = build_partition(2, std::numbers::pi / 4);
  for (std::size_t c = 0; c < p.size(); ++c) {
    if (!p.cell(c).is_cap) continue;
    const double colat = p.cell(c).colatitude.front().first == 0.0 ? 0.0 : std::numbers::pi;
    const auto pole = p.from_local({colat}, {1.0, 0.0});
    CHECK(spherical_distance(pick_representative(p, c), pole) < 1e-12);
  }
  const auto circle = build_partition(1, std::numbers::pi / 2);
  const double step = 2 * std::numbers::pi / 5;
  for (std::size_t c = 0; c < 5; ++c) {
    const double mid = circle.root().arc_offset + (static_cast<double>(c) + 0.5) * step;
    const auto rep = pick_representative(circle, c, [](const UnitVector&) { return true; });
    CHECK(spherical_distance(rep, UnitVector::from_angle(mid)) < 1e-12);
  }
  const auto nowhere = [](const UnitVector&) { return false; };
  CHECK_THROWS_AS(pick_representative(circle, 0, nowhere, 500), Error);
  try {
    pick_representative(circle, 0, nowhere, 500);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RepresentativeNotFound);
  }
}

TEST_CASE("atomic partitions keep atoms off cell boundaries") {
  // Atoms exactly on the default arc boundaries force a rotated layout.
  std::vector<UnitVector> atoms;
  for (int j = 0; j < 5; ++j) atoms.push_back(UnitVector::from_angle(2 * std::numbers::pi * j / 5));
  const AtomicMeasure mu(atoms, std::vector<double>(5, 0.2));
  const auto p = build_partition(1, std::numbers::pi / 2, mu);
  CHECK(p.offset_attempt() > 0);
  for (const auto& x : atoms) {
    const auto c = p.locate(x);
    CHECK(p.locate(UnitVector::from_angle(x.angle() + 1e-9)) == c);
    CHECK(p.locate(UnitVector::from_angle(x.angle() - 1e-9)) == c);
  }
  const double total = std::accumulate(p.masses().begin(), p.masses().end(), 0.0);
  CHECK(total == doctest::Approx(1.0));
}
