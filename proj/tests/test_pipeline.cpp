#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "gip/io.hpp"
#include "gip/pipeline.hpp"
#include "test_util.hpp"

using namespace gip;
using gip::test::at_deg;

namespace {

SolveConfig quick() {
  SolveConfig c;
  c.samples = 100'000;
  return c;
}

const Solution& square_solution() {
  static const Solution s = solve_gauss_image(DensityMeasure::uniform(2), gip::test::square_mu(), quick());
  return s;
}

}  // namespace

TEST_CASE("solving the square") {
  const auto& s = square_solution();
  const auto& r = s.report;
  CHECK(r.status == SolveStatus::Solved);
  for (const auto& c : r.checks) {
    INFO(c.name << ": " << c.detail);
    CHECK(c.passed);
  }
  const auto radii = s.body.radii();
  const auto [lo, hi] = std::minmax_element(radii.begin(), radii.end());
  CHECK((*hi - *lo) / *hi <= 1e-6);
  CHECK(r.pushforward.exact);
  for (double w : r.pushforward.weights) CHECK(w == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(r.duality_gap >= 0.0);
  CHECK(r.duality_gap <= 1e-8 * (1 + std::abs(r.primal_cost)));
  CHECK(r.alpha > 0.0);
  CHECK(r.alpha < std::numbers::pi / 4);
  CHECK(r.monotonicity.monotone);
  CHECK(r.monotonicity.exhaustive);
}

TEST_CASE("k-gons solve to regular polygons") {
  for (std::size_t k : {3u, 5u, 8u}) {
    const auto s = solve_gauss_image(DensityMeasure::uniform(2), gip::test::kgon_mu(k), quick());
    CHECK(s.report.status == SolveStatus::Solved);
    for (double w : s.report.pushforward.weights) CHECK(w == doctest::Approx(1.0 / k).epsilon(1e-9));
  }
}

TEST_CASE("a fixed alpha is honoured") {
  auto c = quick();
  c.alpha = std::numbers::pi / 16;
  const auto s = solve_gauss_image(DensityMeasure::uniform(2), gip::test::square_mu(), c);
  CHECK(s.report.alpha == std::numbers::pi / 16);
  CHECK(s.report.status == SolveStatus::Solved);
}

TEST_CASE("a target inside a hemisphere is rejected with a witness") {
  const auto one = gip::test::equal_atoms(gip::test::circle_atoms({30}));
  try {
    solve_gauss_image(DensityMeasure::uniform(2), one, quick());
    FAIL("expected ConcentratedTarget");
  } catch (const ConcentratedTargetError& e) {
    CHECK(e.code() == ErrorCode::ConcentratedTarget);
    CHECK(dot(e.witness(), at_deg(30)) >= -1e-12);
  }
  const auto pair = gip::test::equal_atoms(gip::test::circle_atoms({0, 180}));
  CHECK_THROWS_AS(solve_gauss_image(DensityMeasure::uniform(2), pair, quick()), ConcentratedTargetError);
}

TEST_CASE("a heavy atom violates weak Aleksandrov at every alpha") {
  const AtomicMeasure mu(gip::test::circle_atoms({90, 210, 330}),
                         std::vector<Fraction>{Fraction(1, 2), Fraction(3, 10), Fraction(1, 5)});
  try {
    solve_gauss_image(DensityMeasure::uniform(2), mu, quick());
    FAIL("expected WeakAleksandrovViolated");
  } catch (const WeakAleksandrovError& e) {
    CHECK(e.code() == ErrorCode::WeakAleksandrovViolated);
    CHECK_FALSE(e.verdict().holds);
    CHECK(e.verdict().mu_mass > e.verdict().lambda_mass);
    CHECK(std::find(e.verdict().violating_subset.begin(), e.verdict().violating_subset.end(), 0u) !=
          e.verdict().violating_subset.end());
  }
}

TEST_CASE("configuration validation") {
  SolveConfig c;
  c.alpha = 0.0;
  CHECK_THROWS_AS(c.validate(4), Error);
  c.alpha = std::numbers::pi / 4;
  CHECK_THROWS_AS(c.validate(4), Error);
  c.alpha = 0.3;
  CHECK_NOTHROW(c.validate(4));
  c.samples = 9'999;
  CHECK_THROWS_AS(c.validate(4), Error);
  c.samples = 10'000;
  c.denominator = 3;
  CHECK_THROWS_AS(c.validate(4), Error);
  c.denominator = 4;
  CHECK_NOTHROW(c.validate(4));
}

TEST_CASE("re-verification of stored bodies") {
  const auto& s = square_solution();
  const auto again = run_verification(s.body, DensityMeasure::uniform(2), gip::test::square_mu(), quick());
  CHECK(again.status == SolveStatus::Solved);

  const AtomicMeasure wrong(gip::test::circle_atoms({45, 135, 225, 315}),
                            std::vector<Fraction>{Fraction(3, 10), Fraction(3, 10), Fraction(1, 5), Fraction(1, 5)});
  const auto bad = run_verification(s.body, DensityMeasure::uniform(2), wrong, quick());
  CHECK(bad.status == SolveStatus::FailedVerification);
  CHECK_FALSE(bad.passed("pushforward"));
  REQUIRE(bad.pushforward_error.size() == 4);
  for (double e : bad.pushforward_error) CHECK(std::abs(e) == doctest::Approx(0.05).epsilon(1e-9));

  const auto moved = gip::test::equal_atoms(gip::test::circle_atoms({40, 135, 225, 315}));
  CHECK_THROWS_AS(run_verification(s.body, DensityMeasure::uniform(2), moved, quick()), Error);
}

TEST_CASE("reports are deterministic") {
  const auto a = solve_gauss_image(DensityMeasure::uniform(2), gip::test::kgon_mu(5), quick());
  const auto b = solve_gauss_image(DensityMeasure::uniform(2), gip::test::kgon_mu(5), quick());
  CHECK(report_to_json(a.report).dump() == report_to_json(b.report).dump());
  CHECK_FALSE(report_to_json(a.report).contains("timings_ms"));
  CHECK(report_to_json(a.report, true).contains("timings_ms"));
}

TEST_CASE("measure JSON round trips") {
  const auto mu = gip::test::square_mu();
  const auto j = measure_to_json(mu);
  const auto back = std::get<AtomicMeasure>(measure_from_json(j));
  REQUIRE(back.is_rational());
  CHECK(back.exact_weights() == mu.exact_weights());
  for (std::size_t k = 0; k < 4; ++k) CHECK(spherical_distance(back.atom(k), mu.atom(k)) < 1e-15);

  const auto numeric = measure_from_json(Json::parse(R"({"type":"atomic","atoms":[[1,0],[-1,0.5]],"weights":[0.25,0.75]})"));
  const auto& nm = std::get<AtomicMeasure>(numeric);
  CHECK_FALSE(nm.is_rational());
  CHECK(nm.weight(1) == 0.75);
  CHECK(nm.atom(1).coords()[0] == doctest::Approx(-2 / std::sqrt(5.0)));

  const auto u = std::get<DensityMeasure>(measure_from_json(Json::parse(R"({"type":"density","family":"uniform","dim":2})")));
  CHECK(u.ambient_dim() == 3);
  const auto hinted = std::get<DensityMeasure>(measure_from_json(Json::parse(R"({"type":"density"})"), 2));
  CHECK(hinted.ambient_dim() == 2);
  const auto cap = std::get<DensityMeasure>(
      measure_from_json(Json::parse(R"({"type":"density","family":"cap","cap_center":[0,1],"cap_radius":0.5})")));
  CHECK(cap.arc_mass(Arc{std::numbers::pi / 2 - 0.25, 0.5}) == doctest::Approx(0.5));
  const auto caps = std::get<DensityMeasure>(measure_from_json(
      measure_to_json(DensityMeasure::caps({Cap{at_deg(90), 0.3}, Cap{at_deg(270), 0.3}}))));
  CHECK(caps.cap_list().size() == 2);
  CHECK(caps.in_support(at_deg(90)));
  CHECK_FALSE(caps.in_support(at_deg(0)));
}

TEST_CASE("malformed measure JSON") {
  auto malformed = [](const char* text, std::size_t hint = 0) {
    try {
      measure_from_json(Json::parse(text), hint);
    } catch (const Error& e) {
      return e.code() == ErrorCode::MalformedInput;
    }
    return false;
  };
  CHECK(malformed(R"([1,2])"));
  CHECK(malformed(R"({"type":"cloud"})"));
  CHECK(malformed(R"({"type":"atomic","atoms":[[1,0]]})"));
  CHECK(malformed(R"({"type":"atomic","atoms":[[1,0],[0,1]],"weights":["1/2"]})"));
  CHECK(malformed(R"({"type":"atomic","atoms":[[0,0]],"weights":["1"]})"));
  CHECK(malformed(R"({"type":"atomic","atoms":[["x",0]],"weights":["1"]})"));
  CHECK(malformed(R"({"type":"atomic","atoms":[[1,0]],"weights":[true]})"));
  CHECK(malformed(R"({"type":"atomic","atoms":[[1,0]],"weights":["1/0"]})"));
  CHECK(malformed(R"({"type":"density","family":"uniform"})"));
  CHECK(malformed(R"({"type":"density","family":"gaussian","dim":1})"));
  CHECK(malformed(R"({"type":"density","family":"cap","cap_center":[0,1]})"));
  CHECK(malformed(R"({"type":"density","family":"caps","caps":[{"center":[0,1]}]})"));
}

TEST_CASE("body and plan exports") {
  const auto& s = square_solution();
  const auto body = body_from_json(body_to_json(s.body));
  REQUIRE(body.size() == s.body.size());
  for (std::size_t k = 0; k < body.size(); ++k) CHECK(body.radii()[k] == s.body.radii()[k]);

  const auto poly = polyline_json(s.body);
  CHECK(poly["closed"] == true);
  CHECK(poly["vertices"].size() == 4);

  const auto plan = plan_to_json(s.plan);
  CHECK(plan["entries"].size() == s.plan.entries.size());
  Fraction total(0);
  for (const auto& t : plan["entries"]) total += parse_fraction(t[2].get<std::string>());
  CHECK(total == Fraction(1));

  const auto dump = potential_dump(s);
  CHECK(dump["atoms"].size() == s.mu_d.size());
  CHECK(dump["connectors"].size() == s.report.components);

  const ConvexBodyRep tetra(gip::test::tetra_mu().atoms(), std::vector<double>(4, 1.0));
  std::istringstream obj(obj_text(tetra));
  std::string line;
  int vertices = 0, faces = 0;
  while (std::getline(obj, line)) {
    vertices += line.rfind("v ", 0) == 0;
    faces += line.rfind("f ", 0) == 0;
  }
  CHECK(vertices == 4);
  CHECK(faces == 4);

  CHECK_THROWS_AS(body_from_json(Json::parse(R"({"directions":[[1,0]]})")), Error);
}

TEST_CASE("two antipodal caps glue separate components") {
  const auto lambda = DensityMeasure::caps({Cap{at_deg(90), gip::test::deg(20)}, Cap{at_deg(270), gip::test::deg(20)}});
  const auto mu = gip::test::equal_atoms(gip::test::circle_atoms({88, 92, 268, 272}));
  const auto s = solve_gauss_image(lambda, mu, quick());
  CHECK(s.report.status == SolveStatus::Solved);
  CHECK(s.report.components == 2);
  CHECK(s.report.worst_constraint <= 1e-9);
  CHECK(s.report.worst_gamma_gap <= 1e-7);
  for (double w : s.report.pushforward.weights) CHECK(w == doctest::Approx(0.25).epsilon(1e-9));
}
