#include <doctest.h>

#include <functional>

#include "gip/potential.hpp"
#include "gip/sampling.hpp"
#include "test_util.hpp"

using namespace gip;
using gip::test::at_deg;
using gip::test::deg;

namespace {

using Pairs = std::vector<std::pair<UnitVector, UnitVector>>;

Pairs pairs_deg(std::initializer_list<std::pair<double, double>> list) {
  Pairs out;
  for (const auto& [n, x] : list) out.emplace_back(at_deg(n), at_deg(x));
  return out;
}

// Minimum c-path cost from pair `from` to pair `to` over all simple paths,
// by depth-first enumeration. Edge a -> b costs c(n_b, x_a) - c(n_a, x_a).
double brute_path_cost(const Pairs& g, std::size_t from, std::size_t to) {
  if (from == to) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  std::vector<char> used(g.size(), 0);
  std::function<void(std::size_t, double)> go = [&](std::size_t a, double acc) {
    if (a == to) {
      best = std::min(best, acc);
      return;
    }
    used[a] = 1;
    for (std::size_t b = 0; b < g.size(); ++b) {
      if (used[b]) continue;
      const double step = cost_value(g[b].first, g[a].second);
      if (!std::isfinite(step)) continue;
      go(b, acc + step - cost_value(g[a].first, g[a].second));
    }
    used[a] = 0;
  };
  go(from, 0.0);
  return best;
}

// psi_C at the target of pair b: -min path cost + c(n_b, x_b), maximized
// over pairs sharing that target.
double brute_psi(const Pairs& g, std::size_t base, const UnitVector& x) {
  double best = kNegInfinity;
  for (std::size_t b = 0; b < g.size(); ++b) {
    if (!(g[b].second == x)) continue;
    const double path = brute_path_cost(g, base, b);
    if (std::isfinite(path)) best = std::max(best, -path + cost_value(g[b].first, g[b].second));
  }
  return best;
}

}  // namespace

TEST_CASE("chain components") {
  CHECK(chain_components(gip::test::circle_atoms({0, 10, 20}), deg(15)) == std::vector<std::size_t>{0, 0, 0});
  CHECK(chain_components(gip::test::circle_atoms({0, 100}), deg(15)) == std::vector<std::size_t>{0, 1});
  CHECK(chain_components(gip::test::circle_atoms({42}), deg(15)) == std::vector<std::size_t>{0});
  // Labels follow the smallest member.
  CHECK(chain_components(gip::test::circle_atoms({100, 0, 105, 5}), deg(15)) ==
        std::vector<std::size_t>{0, 1, 0, 1});
}

TEST_CASE("support graph of the crossing two by two instance") {
  const AtomicMeasure src(gip::test::circle_atoms({0, 90}), std::vector<Fraction>{Fraction(1, 2), Fraction(1, 2)});
  const AtomicMeasure dst(gip::test::circle_atoms({10, 80}), std::vector<Fraction>{Fraction(1, 2), Fraction(1, 2)});
  const auto straight = make_plan(src, dst, {{0, 0, Fraction(1, 2)}, {1, 1, Fraction(1, 2)}});
  const auto crossed = make_plan(src, dst, {{0, 1, Fraction(1, 2)}, {1, 0, Fraction(1, 2)}});
  const auto g = build_graph(straight, crossed, 0.05);
  REQUIRE(g.vertices.size() == 2);
  CHECK(g.vertices[0] == std::pair<std::size_t, std::size_t>{0, 0});
  CHECK(g.vertices[1] == std::pair<std::size_t, std::size_t>{1, 1});
  CHECK(g.primal_edge(0, 1));
  CHECK(g.primal_edge(1, 0));
  CHECK_FALSE(g.primal_edge(0, 0));
  CHECK(g.primal_within_enlarged);
  CHECK(g.every_vertex_on_cycle);
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t b = 0; b < 2; ++b) {
      if (g.primal_edge(a, b)) CHECK(g.enlarged_edge(a, b));
    }
  }

  const auto loops = build_graph(straight, straight, 0.05);
  CHECK(loops.primal_edge(0, 0));
  CHECK(loops.primal_edge(1, 1));
  CHECK_FALSE(loops.primal_edge(0, 1));
  CHECK(loops.every_vertex_on_cycle);

  const AtomicMeasure other(gip::test::circle_atoms({10, 80}), std::vector<Fraction>{Fraction(1, 3), Fraction(2, 3)});
  CHECK_THROWS_AS(build_graph(straight, make_plan(src, other, {{0, 0, Fraction(1, 3)}, {1, 1, Fraction(1, 6)},
                                                                {0, 1, Fraction(1, 6)}, {1, 1, Fraction(1, 3)}}),
                              0.05),
                  Error);
}

TEST_CASE("support graph on a chained atom set has one component") {
  const auto mu = gip::test::equal_atoms(gip::test::circle_atoms({0, 3, 6, 9}));
  const auto diag = make_plan(mu, mu, {{0, 0, Fraction(1, 4)}, {1, 1, Fraction(1, 4)}, {2, 2, Fraction(1, 4)},
                                       {3, 3, Fraction(1, 4)}});
  const auto g = build_graph(diag, diag, deg(16));
  CHECK(g.component_count == 1);
  CHECK(g.hop_bound_holds);
  CHECK(g.max_hops <= g.vertices.size());
}

TEST_CASE("c-path potentials") {
  {
    const CPathGraph one(pairs_deg({{0, 20}}));
    const auto psi = component_potential(one, 0);
    CHECK(psi[0] == doctest::Approx(cost_value(at_deg(0), at_deg(20))).epsilon(1e-15));
  }
  const auto g = pairs_deg({{0, 0}, {30, 30}});
  const CPathGraph cg(g);
  const auto psi = component_potential(cg, 0);
  CHECK(psi[0] == doctest::Approx(0.0));
  CHECK(psi[1] == doctest::Approx(std::log(std::cos(deg(30)))).epsilon(1e-14));
  CHECK(psi[1] == doctest::Approx(-0.143841).epsilon(1e-5));
  CHECK(psi[1] == doctest::Approx(brute_psi(g, 0, at_deg(30))).epsilon(1e-14));
}

TEST_CASE("a non-monotone pair set has a negative cycle") {
  const CPathGraph cg(pairs_deg({{0, 80}, {90, 10}}));
  try {
    cg.from(0);
    FAIL("expected a negative cycle");
  } catch (const NegativeCycleError& e) {
    CHECK(e.code() == ErrorCode::NegativeCycle);
    CHECK(e.weight() < -kNegativeCycleTolerance);
    CHECK(e.cycle().size() == 2);
  }
}

TEST_CASE("connectors across components") {
  SUBCASE("separated components") {
    const CPathGraph cg(pairs_deg({{0, 0}, {10, 10}, {180, 180}, {190, 190}}));
    const auto c = connector_costs(cg, {0, 2});
    CHECK(c[0][0] == 0.0);
    CHECK(c[1][1] == 0.0);
    CHECK(std::isinf(c[0][1]));
    CHECK(std::isinf(c[1][0]));
    std::vector<std::vector<double>> per{component_potential(cg, 0), component_potential(cg, 2)};
    const std::vector<std::size_t> label{0, 0, 1, 1};
    const auto psi = global_psi(per, c, label);
    for (std::size_t t = 0; t < 4; ++t) CHECK(psi[t] == doctest::Approx(per[label[t]][t]).epsilon(1e-15));
  }
  SUBCASE("one bridge pair") {
    const auto g = pairs_deg({{0, 0}, {10, 10}, {60, 65}, {120, 120}, {130, 130}});
    const CPathGraph cg(g);
    const std::vector<std::size_t> bases{0, 3};
    const auto c = connector_costs(cg, bases);
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        const double oracle = brute_path_cost(g, bases[i], bases[j]);
        REQUIRE(std::isfinite(oracle));
        CHECK(c[i][j] == doctest::Approx(oracle).epsilon(1e-13));
      }
    }
    // Every target belongs to one of the two bases' components.
    const std::vector<std::size_t> label{0, 0, 0, 1, 1};
    std::vector<std::vector<double>> per{component_potential(cg, 0), component_potential(cg, 3)};
    const auto psi = global_psi(per, c, label);
    for (std::size_t t = 0; t < 5; ++t) {
      const std::size_t j = label[t];
      CHECK(per[j][t] == doctest::Approx(brute_psi(g, bases[j], cg.targets()[t])).epsilon(1e-13));
      double oracle = kNegInfinity;
      for (std::size_t i = 0; i < 2; ++i) oracle = std::max(oracle, -c[i][j] + per[j][t]);
      CHECK(psi[t] == doctest::Approx(oracle).epsilon(1e-14));
      CHECK(psi[t] >= per[j][t]);
    }
  }
  SUBCASE("single component") {
    const CPathGraph cg(pairs_deg({{0, 0}, {10, 10}, {20, 20}}));
    const auto c = connector_costs(cg, {0});
    const auto per = component_potential(cg, 0);
    const auto psi = global_psi({per}, c, {0, 0, 0});
    for (std::size_t t = 0; t < 3; ++t) CHECK(psi[t] == per[t]);
  }
}

TEST_CASE("psi upper bound") {
  CHECK(psi_upper_bound(3, 0.4) == doctest::Approx(-3 * std::log(std::cos(std::numbers::pi / 2 - 0.05))));
}

TEST_CASE("Kantorovich potential values") {
  const auto atoms = gip::test::circle_atoms({45, 135, 225, 315});
  const auto phi = potential_phi(std::vector<double>(4, 0.0), atoms);
  CHECK(phi(at_deg(45)) == doctest::Approx(0.0));
  CHECK(phi(at_deg(0)) == doctest::Approx(std::log(std::sqrt(2.0))).epsilon(1e-14));
  CHECK(phi(at_deg(0)) == doctest::Approx(0.346574).epsilon(1e-6));

  const double r = 1.7;
  const auto shifted = potential_phi(std::vector<double>(4, std::log(r)), atoms);
  auto rng = block_engine(2, 0);
  for (int t = 0; t < 100; ++t) {
    const auto n = sample_uniform_sphere(2, rng);
    CHECK(shifted(n) == doctest::Approx(-std::log(r) + phi(n)).epsilon(1e-13));
  }
  CHECK(phi.lipschitz_estimate() < 2.0);

  const auto half = potential_phi({0.0, 0.0, 0.0}, gip::test::circle_atoms({10, 60, 100}));
  try {
    half(at_deg(235));
    FAIL("expected an unbounded potential");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnboundedPotential);
  }
  CHECK_THROWS_AS(potential_phi({kNegInfinity, kNegInfinity}, gip::test::circle_atoms({0, 180})), Error);
}

TEST_CASE("subdifferential verification") {
  // psi at the atoms of a discrete potential, -infinity elsewhere.
  auto on_atoms = [](std::vector<UnitVector> atoms, std::vector<double> psi) {
    return [atoms = std::move(atoms), psi = std::move(psi)](const UnitVector& x) {
      for (std::size_t j = 0; j < atoms.size(); ++j) {
        if (atoms[j] == x) return psi[j];
      }
      return kNegInfinity;
    };
  };
  const auto gamma = pairs_deg({{0, 0}, {30, 30}});
  const CPathGraph cg(gamma);
  const auto psi = component_potential(cg, 0);
  const auto atoms = cg.targets();
  const auto phi = potential_phi(psi, atoms);
  CHECK(phi(at_deg(0)) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(phi(at_deg(30)) == doctest::Approx(0.143841).epsilon(1e-5));
  const auto ok = verify_subdifferential(gamma, phi, on_atoms(atoms, psi), atoms);
  CHECK(ok.passed);
  CHECK(ok.worst_gamma_gap < 1e-12);

  auto bumped = psi;
  bumped[1] += 0.1;
  const auto bad = verify_subdifferential(gamma, phi, on_atoms(atoms, bumped), atoms);
  CHECK_FALSE(bad.passed);
  CHECK(bad.worst_constraint > 0.05);
  CHECK(bad.worst_gamma_gap == doctest::Approx(0.1));

  std::vector<UnitVector> ring;
  Pairs diag;
  for (int j = 0; j < 12; ++j) {
    ring.push_back(UnitVector::from_angle(2 * std::numbers::pi * j / 12));
    diag.emplace_back(ring.back(), ring.back());
  }
  const std::vector<double> zero(12, 0.0);
  const auto ball = verify_subdifferential(diag, potential_phi(zero, ring), on_atoms(ring, zero), ring);
  CHECK(ball.passed);
}
