#include <doctest.h>

#include <functional>
#include <map>
#include <random>

#include "gip/measures.hpp"
#include "gip/partition.hpp"
#include "gip/transport.hpp"
#include "test_util.hpp"

using namespace gip;
using gip::test::at_deg;
using gip::test::deg;

namespace {

using Units = std::vector<std::vector<std::int64_t>>;

// Minimum cost over every integer plan with the given marginals, by
// exhaustive enumeration. Infinite-cost cells must stay empty.
double brute_force_cost(const std::vector<std::vector<double>>& c, const std::vector<std::int64_t>& rows,
                        const std::vector<std::int64_t>& cols, std::int64_t denominator) {
  const std::size_t l = rows.size(), p = cols.size();
  double best = std::numeric_limits<double>::infinity();
  Units x(l, std::vector<std::int64_t>(p, 0));
  std::vector<std::int64_t> col_left = cols;
  std::function<void(std::size_t, std::size_t, std::int64_t)> go = [&](std::size_t i, std::size_t j,
                                                                       std::int64_t row_left) {
    if (i == l) {
      double total = 0.0;
      for (std::size_t a = 0; a < l; ++a) {
        for (std::size_t b = 0; b < p; ++b) {
          if (x[a][b] > 0) total += c[a][b] * static_cast<double>(x[a][b]) / static_cast<double>(denominator);
        }
      }
      best = std::min(best, total);
      return;
    }
    if (j == p - 1) {
      if (row_left > col_left[j] || (row_left > 0 && !std::isfinite(c[i][j]))) return;
      x[i][j] = row_left;
      col_left[j] -= row_left;
      go(i + 1, 0, i + 1 < l ? rows[i + 1] : 0);
      col_left[j] += row_left;
      x[i][j] = 0;
      return;
    }
    for (std::int64_t u = 0; u <= std::min(row_left, col_left[j]); ++u) {
      if (u > 0 && !std::isfinite(c[i][j])) break;
      x[i][j] = u;
      col_left[j] -= u;
      go(i, j + 1, row_left - u);
      col_left[j] += u;
    }
    x[i][j] = 0;
  };
  go(0, 0, rows[0]);
  return best;
}

AtomicMeasure random_measure(std::size_t n, std::int64_t denominator, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2 * std::numbers::pi);
  std::vector<UnitVector> atoms;
  for (std::size_t j = 0; j < n; ++j) atoms.push_back(UnitVector::from_angle(angle(rng)));
  // Random composition of the denominator into n positive parts.
  std::vector<std::int64_t> parts(n, 1);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::int64_t u = static_cast<std::int64_t>(n); u < denominator; ++u) ++parts[pick(rng)];
  std::vector<Fraction> w;
  for (auto q : parts) w.emplace_back(q, denominator);
  return AtomicMeasure(std::move(atoms), std::move(w));
}

std::vector<std::pair<UnitVector, UnitVector>> support_pairs(const TransportPlan& plan) {
  std::vector<std::pair<UnitVector, UnitVector>> out;
  for (const auto& e : plan.entries) out.emplace_back(plan.source.atom(e.i), plan.target.atom(e.j));
  return out;
}

}  // namespace

TEST_CASE("fractions and unit rounding") {
  CHECK(parse_fraction("3/12") == Fraction(1, 4));
  CHECK(parse_fraction("2") == Fraction(2));
  CHECK_THROWS_AS(parse_fraction("1/0"), Error);
  CHECK_THROWS_AS(parse_fraction("x"), Error);
  const std::vector<Fraction> f{Fraction(1, 6), Fraction(1, 4), Fraction(7, 12)};
  CHECK(lcm_of_denominators(f) == 12);
  // Largest remainders: 10 * (0.33.., 0.33.., 0.33..) gives 4, 3, 3.
  const std::vector<double> w{1.0, 1.0, 1.0};
  double moved = 0.0;
  const auto u = round_to_units(w, 10, &moved);
  CHECK(u == std::vector<std::int64_t>{4, 3, 3});
  CHECK(moved > 0.0);
}

TEST_CASE("Hall plan on identical measures is the identity") {
  const auto mu = gip::test::square_mu();
  const auto plan = hall_feasible_plan(mu, mu, 0.1);
  REQUIRE(plan.entries.size() == 4);
  for (const auto& e : plan.entries) {
    CHECK(e.i == e.j);
    CHECK(plan.exact_mass(e) == Fraction(1, 4));
  }
}

TEST_CASE("Hall plan for eight arcs against the square stays within the admissible distance") {
  const auto lambda = DensityMeasure::uniform(2);
  PartitionOptions options;
  options.rationalize = true;
  options.denominator = 8;
  const auto p = build_partition(1, deg(50), lambda, options);
  const auto lambda_d = discretize(lambda, p);
  const double alpha = std::numbers::pi / 16;
  for (const auto& plan : {hall_feasible_plan(lambda_d, gip::test::square_mu(), alpha),
                           hall_feasible_plan_by_matching(lambda_d, gip::test::square_mu(), alpha)}) {
    plan.check_marginals();
    for (const auto& e : plan.entries) {
      CHECK(spherical_distance(plan.source.atom(e.i), plan.target.atom(e.j)) <= std::numbers::pi / 2 - alpha);
    }
  }
}

TEST_CASE("Hall plan across antipodes is infeasible") {
  const AtomicMeasure a({UnitVector::axis(2, 0)}, std::vector<Fraction>{Fraction(1)});
  const AtomicMeasure b({-UnitVector::axis(2, 0)}, std::vector<Fraction>{Fraction(1)});
  try {
    hall_feasible_plan(a, b, 0.1);
    FAIL("expected NoFeasiblePlan");
  } catch (const NoFeasiblePlanError& e) {
    CHECK(e.code() == ErrorCode::NoFeasiblePlan);
    CHECK(e.deficient_set() == std::vector<std::size_t>{0});
    CHECK(e.neighbourhood().empty());
    CHECK(e.deficit() == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(hall_feasible_plan_by_matching(a, b, 0.1), NoFeasiblePlanError);
}

TEST_CASE("simplex on one pair") {
  const AtomicMeasure a({at_deg(5)}, std::vector<Fraction>{Fraction(1)});
  const AtomicMeasure b({at_deg(40)}, std::vector<Fraction>{Fraction(1)});
  const auto [plan, dual] = optimal_plan(a, b, hall_feasible_plan(a, b, 0.1));
  REQUIRE(plan.entries.size() == 1);
  CHECK(dual.phi[0] + dual.psi[0] == doctest::Approx(cost_value(a.atom(0), b.atom(0))).epsilon(1e-14));
  CHECK(dual.phi[0] == 0.0);
}

TEST_CASE("two by two: the diagonal matching beats the crossing one") {
  const AtomicMeasure src(gip::test::circle_atoms({0, 90}), std::vector<Fraction>{Fraction(1, 2), Fraction(1, 2)});
  const AtomicMeasure dst(gip::test::circle_atoms({10, 80}), std::vector<Fraction>{Fraction(1, 2), Fraction(1, 2)});
  const double diagonal = 0.5 * (cost_value(src.atom(0), dst.atom(0)) + cost_value(src.atom(1), dst.atom(1)));
  const double crossing = 0.5 * (cost_value(src.atom(0), dst.atom(1)) + cost_value(src.atom(1), dst.atom(0)));
  REQUIRE(diagonal < crossing);
  // The two pair costs sum to about 0.030616; each pair carries mass 1/2.
  CHECK(-2 * std::log(std::cos(deg(10))) == doctest::Approx(0.030616).epsilon(1e-4));

  const auto start = make_plan(src, dst, {{0, 1, Fraction(1, 2)}, {1, 0, Fraction(1, 2)}});
  for (bool warm : {false, true}) {
    SimplexOptions options;
    options.warm_start = warm;
    const auto [plan, dual] = optimal_plan(src, dst, start, options);
    REQUIRE(plan.entries.size() == 2);
    CHECK(plan.entries[0].i == 0);
    CHECK(plan.entries[0].j == 0);
    CHECK(plan.entries[1].i == 1);
    CHECK(plan.entries[1].j == 1);
    CHECK(plan_cost(plan).value() == doctest::Approx(diagonal).epsilon(1e-14));
    CHECK(2 * plan_cost(plan).value() == doctest::Approx(0.030616).epsilon(1e-4));
    CHECK(dual_value(plan, dual) == doctest::Approx(diagonal).epsilon(1e-12));
  }
  CHECK(check_cyclical_monotonicity({{src.atom(0), dst.atom(0)}, {src.atom(1), dst.atom(1)}}).monotone);
  const auto crossed = check_cyclical_monotonicity({{src.atom(0), dst.atom(1)}, {src.atom(1), dst.atom(0)}});
  CHECK_FALSE(crossed.monotone);
  CHECK(crossed.cycle.size() == 2);
  CHECK(crossed.worst_slack < 0.0);
  CHECK(check_cyclical_monotonicity({{src.atom(0), dst.atom(0)}}).monotone);
}

TEST_CASE("plan cost") {
  const auto mu = gip::test::square_mu();
  const auto diag = make_plan(mu, mu, {{0, 0, Fraction(1, 4)}, {1, 1, Fraction(1, 4)}, {2, 2, Fraction(1, 4)},
                                       {3, 3, Fraction(1, 4)}});
  CHECK(plan_cost(diag).value() == 0.0);
  const auto far = make_plan(mu, mu, {{0, 2, Fraction(1, 4)}, {1, 1, Fraction(1, 4)}, {2, 0, Fraction(1, 4)},
                                      {3, 3, Fraction(1, 4)}});
  CHECK(plan_cost(far).is_infinite());
  CHECK_THROWS_AS(make_plan(mu, mu, {{0, 0, Fraction(1, 4)}}), Error);
}

TEST_CASE("simplex matches exhaustive enumeration on small random problems") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const std::int64_t d = 6;
    const auto src = random_measure(3, d, rng);
    const auto dst = random_measure(3, d, rng);
    std::vector<std::vector<double>> c(3, std::vector<double>(3));
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) c[i][j] = cost_value(src.atom(i), dst.atom(j));
    }
    TransportPlan start;
    try {
      start = hall_feasible_plan(src, dst, 1e-6);
    } catch (const NoFeasiblePlanError&) {
      continue;
    }
    std::vector<std::int64_t> rows, cols;
    for (const auto& w : src.exact_weights()) rows.push_back(w.numerator() * (d / w.denominator()));
    for (const auto& w : dst.exact_weights()) cols.push_back(w.numerator() * (d / w.denominator()));
    const double oracle = brute_force_cost(c, rows, cols, d);
    for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) {
      for (bool warm : {false, true}) {
        SimplexOptions options;
        options.pivot_seed = seed;
        options.warm_start = warm;
        const auto [plan, dual] = optimal_plan(src, dst, start, options);
        plan.check_marginals();
        const double primal = plan_cost(plan).value();
        CHECK(primal == doctest::Approx(oracle).epsilon(1e-12));
        const double gap = primal - dual_value(plan, dual);
        CHECK(gap >= -1e-12);
        CHECK(gap <= 1e-8 * (1 + std::abs(primal)));
        for (std::size_t i = 0; i < 3; ++i) {
          for (std::size_t j = 0; j < 3; ++j) {
            if (std::isfinite(c[i][j])) CHECK(dual.phi[i] + dual.psi[j] <= c[i][j] + 1e-12);
          }
        }
        for (const auto& e : plan.entries) {
          CHECK(dual.phi[e.i] + dual.psi[e.j] == doctest::Approx(c[e.i][e.j]).epsilon(1e-12));
        }
        CHECK(check_cyclical_monotonicity(support_pairs(plan)).monotone);
      }
    }
  }
}

TEST_CASE("optimal plan of a discretized uniform circle") {
  const auto lambda = DensityMeasure::uniform(2);
  PartitionOptions options;
  options.rationalize = true;
  options.denominator = 1000;
  const auto p = build_partition(1, deg(5), lambda, options);
  const auto lambda_d = discretize(lambda, p);
  const auto mu = gip::test::kgon_mu(5);
  const auto start = hall_feasible_plan(lambda_d, mu, deg(5));
  SimplexStats stats;
  const auto [plan, dual] = optimal_plan(lambda_d, mu, start, {}, &stats);
  plan.check_marginals();
  const double primal = plan_cost(plan).value();
  const double gap = primal - dual_value(plan, dual);
  CHECK(gap >= -1e-12);
  CHECK(gap <= 1e-8 * (1 + std::abs(primal)));
  CHECK(primal <= plan_cost(start).value() + 1e-15);
  CHECK(stats.components == 1);
  const auto cold = optimal_plan(lambda_d, mu, start, SimplexOptions{.pivot_seed = 3, .warm_start = false});
  CHECK(plan_cost(cold.first).value() == doctest::Approx(primal).epsilon(1e-12));
  const auto verdict = check_cyclical_monotonicity(support_pairs(plan), 4);
  CHECK(verdict.monotone);
}

TEST_CASE("cycle decomposition") {
  const auto mu = gip::test::square_mu();
  const auto diag = make_plan(mu, mu, {{0, 0, Fraction(1, 4)}, {1, 1, Fraction(1, 4)}, {2, 2, Fraction(1, 4)},
                                       {3, 3, Fraction(1, 4)}});
  const auto loops = decompose_cycles(diag, diag);
  REQUIRE(loops.cycles.size() == 4);
  for (std::size_t u = 0; u < 4; ++u) {
    CHECK(loops.cycles[u].vertices == std::vector<std::pair<std::size_t, std::size_t>>{{u, u}});
    CHECK(Fraction(loops.cycles[u].units, loops.denominator) == Fraction(1, 4));
  }

  const AtomicMeasure two(gip::test::circle_atoms({0, 90}), std::vector<Fraction>{Fraction(1, 2), Fraction(1, 2)});
  const auto straight = make_plan(two, two, {{0, 0, Fraction(1, 2)}, {1, 1, Fraction(1, 2)}});
  const auto crossed = make_plan(two, two, {{0, 1, Fraction(1, 2)}, {1, 0, Fraction(1, 2)}});
  const auto one = decompose_cycles(straight, crossed);
  REQUIRE(one.cycles.size() == 1);
  CHECK(one.iterations == 1);
  CHECK(one.cycles[0].vertices == std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}, {1, 1}});
  CHECK(Fraction(one.cycles[0].units, one.denominator) == Fraction(1, 2));

  const AtomicMeasure other(gip::test::circle_atoms({0, 90}), std::vector<Fraction>{Fraction(1, 3), Fraction(2, 3)});
  CHECK_THROWS_AS(decompose_cycles(straight, make_plan(other, other, {{0, 0, Fraction(1, 3)}, {1, 1, Fraction(2, 3)}})),
                  Error);
}
