// Command line front end: solve, check, verify, compare and demo.

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>

#include "gip/io.hpp"

namespace {

constexpr int kSolved = 0;
constexpr int kConditionViolated = 2;
constexpr int kInfeasible = 3;
constexpr int kVerificationFailed = 4;
constexpr int kBadInput = 1;

struct Options {
  std::string lambda_path;
  std::string mu_path;
  std::string body_path;
  std::string other_body_path;
  std::string demo;
  std::string out_dir = ".";
  std::string report = "text";
  double alpha = 0.0;
  std::int64_t denominator = 0;
  std::size_t samples = 1'000'000;
  std::uint64_t seed = gip::kDefaultSeed;
  std::uint64_t pivot_seed = 0;
  bool no_polish = false;
};

gip::SolveConfig config_from(const Options& o) {
  gip::SolveConfig c;
  if (o.alpha > 0) c.alpha = o.alpha;
  c.denominator = o.denominator;
  c.samples = o.samples;
  c.seed = o.seed;
  c.pivot_seed = o.pivot_seed;
  c.polish = !o.no_polish;
  return c;
}

std::pair<gip::DensityMeasure, gip::AtomicMeasure> load_pair(const Options& o) {
  auto mu_spec = gip::load_measure(o.mu_path);
  if (!std::holds_alternative<gip::AtomicMeasure>(mu_spec)) {
    throw gip::Error(gip::ErrorCode::MalformedInput, "mu must be atomic");
  }
  auto mu = std::get<gip::AtomicMeasure>(std::move(mu_spec));
  auto lambda_spec = gip::load_measure(o.lambda_path, mu.ambient_dim());
  if (!std::holds_alternative<gip::DensityMeasure>(lambda_spec)) {
    throw gip::Error(gip::ErrorCode::NotAbsolutelyContinuous, "lambda must be a density");
  }
  return {std::get<gip::DensityMeasure>(std::move(lambda_spec)), std::move(mu)};
}

std::string out_path(const Options& o, const std::string& name) {
  std::filesystem::create_directories(o.out_dir);
  return (std::filesystem::path(o.out_dir) / name).string();
}

void print_report(const Options& o, const gip::SolveReport& r) {
  if (o.report == "json") {
    std::cout << gip::report_to_json(r).dump(2) << '\n';
    return;
  }
  std::cout << "status: " << gip::to_string(r.status) << '\n';
  if (r.alpha > 0) std::cout << "alpha: " << r.alpha << "  cells: " << r.cells << '\n';
  for (const auto& c : r.checks) {
    std::cout << (c.passed ? "  pass  " : "  FAIL  ") << c.name << "  value " << c.value << "  tolerance "
              << c.tolerance << "  (" << c.detail << ")\n";
  }
  for (const auto& [stage, ms] : r.timings) std::cout << "  time  " << stage << "  " << ms << " ms\n";
}

void export_solution(const Options& o, const gip::Solution& s) {
  gip::write_text(out_path(o, "body.json"), gip::body_to_json(s.body).dump(2));
  if (s.body.ambient_dim() == 2) {
    gip::write_text(out_path(o, "body_polyline.json"), gip::polyline_json(s.body).dump(2));
  } else {
    gip::write_text(out_path(o, "body.obj"), gip::obj_text(s.body));
  }
  gip::write_text(out_path(o, "potential.json"), gip::potential_dump(s).dump(2));
  gip::write_text(out_path(o, "plan.json"), gip::plan_to_json(s.plan).dump());
  gip::write_text(out_path(o, "report.json"), gip::report_to_json(s.report).dump(2));
}

int solve(const Options& o, const gip::DensityMeasure& lambda, const gip::AtomicMeasure& mu) {
  try {
    const auto s = gip::solve_gauss_image(lambda, mu, config_from(o));
    export_solution(o, s);
    print_report(o, s.report);
    return s.report.status == gip::SolveStatus::Solved ? kSolved : kVerificationFailed;
  } catch (const gip::ConcentratedTargetError& e) {
    gip::Json cert{{"error", e.what()}, {"witness", std::vector<double>(e.witness().coords().begin(), e.witness().coords().end())}};
    gip::write_text(out_path(o, "certificate.json"), cert.dump(2));
    std::cerr << e.what() << '\n';
    return kConditionViolated;
  } catch (const gip::WeakAleksandrovError& e) {
    gip::Json cert{{"error", e.what()},
                   {"alpha", e.alpha()},
                   {"subset", e.verdict().violating_subset},
                   {"mu_mass", e.verdict().mu_mass},
                   {"lambda_mass", e.verdict().lambda_mass}};
    gip::write_text(out_path(o, "certificate.json"), cert.dump(2));
    std::cerr << e.what() << '\n';
    return kConditionViolated;
  } catch (const gip::NoFeasiblePlanError& e) {
    gip::Json cert{{"error", e.what()},
                   {"deficient_set", e.deficient_set()},
                   {"neighbourhood", e.neighbourhood()},
                   {"deficit", e.deficit()}};
    gip::write_text(out_path(o, "certificate.json"), cert.dump(2));
    std::cerr << e.what() << '\n';
    return kInfeasible;
  }
}

int check(const Options& o) {
  const auto [lambda, mu] = load_pair(o);
  const auto hemisphere = gip::check_hemisphere_concentration(mu);
  std::cout << "hemisphere: " << (hemisphere.concentrated ? "concentrated" : "not concentrated") << '\n';
  bool ok = !hemisphere.concentrated;
  if (ok) {
    const double alpha = o.alpha > 0 ? o.alpha : gip::auto_alpha(lambda, mu, config_from(o));
    const auto weak = gip::weak_aleksandrov_at(mu, lambda, alpha, o.seed);
    std::cout << "weak Aleksandrov at alpha " << alpha << ": " << (weak.holds ? "holds" : "violated")
              << (weak.certifying ? " (all subsets)" : " (sampled)") << '\n';
    ok = weak.holds;
    const auto classical = gip::check_aleksandrov_classical(mu, lambda);
    std::cout << "Aleksandrov condition (advisory): " << (classical.holds ? "holds" : "violated") << '\n';
  }
  return ok ? kSolved : kConditionViolated;
}

int demo(const Options& o) {
  std::vector<gip::UnitVector> atoms;
  std::size_t ambient = 2;
  if (o.demo == "square") {
    for (int k = 0; k < 4; ++k) atoms.push_back(gip::UnitVector::from_angle(std::numbers::pi / 4 + k * std::numbers::pi / 2));
  } else if (o.demo.rfind("kgon:", 0) == 0) {
    const int k = std::stoi(o.demo.substr(5));
    if (k < 3) throw gip::Error(gip::ErrorCode::InvalidArgument, "kgon needs k >= 3");
    for (int s = 0; s < k; ++s) atoms.push_back(gip::UnitVector::from_angle(2 * std::numbers::pi * s / k));
  } else if (o.demo == "tetra") {
    ambient = 3;
    atoms = {gip::UnitVector({1, 1, 1}), gip::UnitVector({1, -1, -1}), gip::UnitVector({-1, 1, -1}),
             gip::UnitVector({-1, -1, 1})};
  } else {
    throw gip::Error(gip::ErrorCode::InvalidArgument, "unknown demo " + o.demo);
  }
  const std::vector<gip::Fraction> weights(atoms.size(), gip::Fraction(1, static_cast<std::int64_t>(atoms.size())));
  return solve(o, gip::DensityMeasure::uniform(ambient), gip::AtomicMeasure(atoms, weights));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gauss image problem solver"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--samples", o.samples, "Monte Carlo samples")->check(CLI::Range(10'000ull, 1'000'000'000ull));
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--report", o.report, "report format")->check(CLI::IsMember({"text", "json"}));
  };
  auto solving = [&](CLI::App* sub) {
    sub->add_option("--alpha", o.alpha, "alpha in radians, searched when omitted");
    sub->add_option("--denominator", o.denominator, "common denominator of the discretized masses");
    sub->add_option("--pivot-seed", o.pivot_seed, "arc order seed of the simplex pricing");
    sub->add_option("--out-dir", o.out_dir, "output directory");
    sub->add_flag("--no-polish", o.no_polish, "skip the Newton refinement of the radii");
  };

  auto* solve_cmd = app.add_subcommand("solve", "reconstruct a body from lambda and mu");
  solve_cmd->add_option("lambda", o.lambda_path, "density spec")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("mu", o.mu_path, "atomic spec")->required()->check(CLI::ExistingFile);
  common(solve_cmd);
  solving(solve_cmd);

  auto* check_cmd = app.add_subcommand("check", "check the existence conditions");
  check_cmd->add_option("lambda", o.lambda_path)->required()->check(CLI::ExistingFile);
  check_cmd->add_option("mu", o.mu_path)->required()->check(CLI::ExistingFile);
  check_cmd->add_option("--alpha", o.alpha, "alpha in radians, searched when omitted");
  common(check_cmd);

  auto* verify_cmd = app.add_subcommand("verify", "re-verify a stored body");
  verify_cmd->add_option("body", o.body_path)->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("lambda", o.lambda_path)->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("mu", o.mu_path)->required()->check(CLI::ExistingFile);
  common(verify_cmd);

  auto* compare_cmd = app.add_subcommand("compare", "disagreement mass of two bodies' pushforward maps");
  compare_cmd->add_option("body", o.body_path)->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("other", o.other_body_path)->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("lambda", o.lambda_path)->required()->check(CLI::ExistingFile);
  common(compare_cmd);

  auto* demo_cmd = app.add_subcommand("demo", "solve a built-in instance");
  demo_cmd->add_option("instance", o.demo, "square, kgon:k or tetra")->required();
  common(demo_cmd);
  solving(demo_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_cmd->parsed()) {
      const auto [lambda, mu] = load_pair(o);
      return solve(o, lambda, mu);
    }
    if (check_cmd->parsed()) return check(o);
    if (verify_cmd->parsed()) {
      const auto [lambda, mu] = load_pair(o);
      const auto r = gip::run_verification(gip::load_body(o.body_path), lambda, mu, config_from(o));
      print_report(o, r);
      return r.status == gip::SolveStatus::Solved ? kSolved : kVerificationFailed;
    }
    if (compare_cmd->parsed()) {
      const auto k = gip::load_body(o.body_path);
      const auto l = gip::load_body(o.other_body_path);
      auto spec = gip::load_measure(o.lambda_path, k.ambient_dim());
      if (!std::holds_alternative<gip::DensityMeasure>(spec)) {
        throw gip::Error(gip::ErrorCode::NotAbsolutelyContinuous, "lambda must be a density");
      }
      const auto d = gip::compare_solutions(k, l, std::get<gip::DensityMeasure>(spec), o.samples, o.seed);
      gip::Json j{{"disagreement", d.mass}, {"std_error", d.std_error}, {"samples", d.samples},
                  {"ties", d.ties}, {"radius_ratio", d.radius_ratio}};
      std::cout << (o.report == "json" ? j.dump(2) : "disagreement mass: " + std::to_string(d.mass)) << '\n';
      return kSolved;
    }
    if (demo_cmd->parsed()) return demo(o);
  } catch (const gip::Error& e) {
    std::cerr << e.what() << '\n';
    switch (e.code()) {
      case gip::ErrorCode::ConcentratedTarget:
      case gip::ErrorCode::WeakAleksandrovViolated:
        return kConditionViolated;
      case gip::ErrorCode::NoFeasiblePlan:
        return kInfeasible;
      case gip::ErrorCode::VerificationFailed:
      case gip::ErrorCode::NegativeCycle:
      case gip::ErrorCode::UnboundedPotential:
        return kVerificationFailed;
      default:
        return kBadInput;
    }
  }
  return kBadInput;
}
