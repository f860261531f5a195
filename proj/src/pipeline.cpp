#include "gip/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "gip/partition.hpp"

namespace gip {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

std::string describe(const UnitVector& u) {
  std::ostringstream s;
  s << "(";
  for (std::size_t k = 0; k < u.ambient_dim(); ++k) s << (k ? ", " : "") << u[k];
  s << ")";
  return s.str();
}

double grid_alpha(std::size_t i) { return std::numbers::pi / 4 * std::pow(2.0, -static_cast<double>(i) / 4); }

struct Discretization {
  double alpha = 0.0;
  std::size_t cells = 0;
  std::int64_t denominator = 0;
  AtomicMeasure lambda_d;
  AtomicMeasure mu_d;
  TransportPlan hall;
};

std::int64_t pick_denominator(const AtomicMeasure& mu, const SolveConfig& config) {
  if (config.denominator > 0) return config.denominator;
  const std::int64_t l = mu.is_rational() ? lcm_of_denominators(mu.exact_weights()) : 1;
  return l <= kMaxUnits ? l * (kMaxUnits / l) : l;
}

Discretization discretize_at(const DensityMeasure& lambda, const AtomicMeasure& mu, double alpha,
                             const SolveConfig& config) {
  Discretization d;
  d.alpha = alpha;
  d.denominator = pick_denominator(mu, config);
  PartitionOptions options;
  options.rationalize = true;
  options.denominator = d.denominator;
  const auto partition = build_partition(lambda.dim(), alpha / 8, lambda, options);
  d.cells = partition.size();
  d.lambda_d = discretize(lambda, partition, [&](const UnitVector& x) { return lambda.in_support(x); });
  d.mu_d = discretize(mu, partition, {}, AtomPlacement::OriginalAtom);
  d.hall = hall_feasible_plan(d.lambda_d, d.mu_d, alpha);
  return d;
}

}  // namespace

void SolveConfig::validate(std::size_t target_atoms) const {
  if (alpha && !(*alpha > 0.0 && *alpha < std::numbers::pi / 4)) {
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, pi/4)");
  }
  if (samples < 10'000) throw Error(ErrorCode::InvalidArgument, "at least 10^4 Monte Carlo samples are required");
  if (denominator != 0 && denominator < static_cast<std::int64_t>(target_atoms)) {
    throw Error(ErrorCode::InvalidArgument, "denominator must be at least the number of atoms");
  }
}

std::string to_string(SolveStatus s) { return s == SolveStatus::Solved ? "SOLVED" : "FAILED_VERIFICATION"; }

bool SolveReport::passed(const std::string& check) const {
  for (const auto& c : checks) {
    if (c.name == check) return c.passed;
  }
  throw Error(ErrorCode::InvalidArgument, "no check named " + check);
}

ConcentratedTargetError::ConcentratedTargetError(UnitVector witness)
    : Error(ErrorCode::ConcentratedTarget, "every atom lies in the closed hemisphere around " + describe(witness)),
      witness_(std::move(witness)) {}

WeakAleksandrovError::WeakAleksandrovError(WeakAleksandrovVerdict verdict, double alpha)
    : Error(ErrorCode::WeakAleksandrovViolated, "mu(F) = " + std::to_string(verdict.mu_mass) +
                                                    " exceeds lambda(F_r) = " + std::to_string(verdict.lambda_mass) +
                                                    " at alpha = " + std::to_string(alpha)),
      verdict_(std::move(verdict)),
      alpha_(alpha) {}

VerificationError::VerificationError(const std::string& check, SolveReport report)
    : Error(ErrorCode::VerificationFailed, check), report_(std::move(report)) {}

WeakAleksandrovVerdict weak_aleksandrov_at(const AtomicMeasure& mu, const DensityMeasure& lambda, double alpha,
                                           std::uint64_t seed) {
  const CheckMode mode = mu.size() <= kMaxExactAtoms ? CheckMode::Exact : CheckMode::Sampled;
  return check_weak_aleksandrov(mu, lambda, alpha, mode, 256, seed);
}

namespace {

// An admissible alpha with the verdict and discretization that proved it.
struct AlphaChoice {
  WeakAleksandrovVerdict weak;
  Discretization d;
};

AlphaChoice search_alpha(const DensityMeasure& lambda, const AtomicMeasure& mu, const SolveConfig& config) {
  // Finer partitions than the mass denominator would leave empty cells.
  const auto cap = std::min(config.max_cells, static_cast<std::size_t>(pick_denominator(mu, config)));
  std::size_t last = 1;
  for (std::size_t i = 2; i <= 64; ++i) {
    if (build_partition(lambda.dim(), grid_alpha(i) / 8).size() > cap) break;
    last = i;
  }
  std::exception_ptr failure;
  std::map<std::size_t, AlphaChoice> found;
  auto feasible = [&](std::size_t i) {
    const double alpha = grid_alpha(i);
    try {
      auto verdict = weak_aleksandrov_at(mu, lambda, alpha, config.seed);
      if (!verdict.holds) throw WeakAleksandrovError(std::move(verdict), alpha);
      found.emplace(i, AlphaChoice{std::move(verdict), discretize_at(lambda, mu, alpha, config)});
      return true;
    } catch (const WeakAleksandrovError&) {
      failure = std::current_exception();
    } catch (const NoFeasiblePlanError&) {
      failure = std::current_exception();
    }
    return false;
  };
  // Gallop from the coarsest grid point so that fine partitions are only
  // built when coarse ones fail, then bisect the last bracket.
  std::size_t lo = 1, hi = 1;
  while (!feasible(hi)) {
    if (hi == last) std::rethrow_exception(failure);
    lo = hi + 1;
    hi = std::min(2 * hi, last);
  }
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (feasible(mid)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return std::move(found.at(hi));
}

}  // namespace

double auto_alpha(const DensityMeasure& lambda, const AtomicMeasure& mu, const SolveConfig& config) {
  return search_alpha(lambda, mu, config).d.alpha;
}


namespace {

struct Glued {
  std::vector<double> psi;
  std::vector<std::vector<double>> connectors;
  std::string gluing;
};

// psi at the atoms of mu_d: the glued path formula, or the all-pairs
// variant when `all_pairs` is set.
Glued glue_potential(const CPathGraph& cg, const TransportPlan& plan, const SupportGraph& graph, bool all_pairs) {
  const std::size_t k = plan.target.size();
  std::vector<std::size_t> atom_of_target(cg.targets().size());
  for (std::size_t a = 0; a < cg.pair_count(); ++a) atom_of_target[cg.target_of(a)] = plan.entries[a].j;
  Glued g;
  std::vector<double> on_targets;
  if (all_pairs) {
    const auto paths = cg.from_every_pair();
    for (double v : paths.target_value) on_targets.push_back(v == kInf ? kNegInfinity : -v);
    g.gluing = "all-pairs";
  } else {
    std::vector<std::size_t> bases(graph.component_count, cg.pair_count());
    for (std::size_t a = 0; a < cg.pair_count(); ++a) {
      const auto& e = plan.entries[a];
      std::size_t& b = bases[graph.component[e.j]];
      if (b == cg.pair_count() || std::make_pair(e.j, e.i) < std::make_pair(plan.entries[b].j, plan.entries[b].i)) {
        b = a;
      }
    }
    std::vector<std::vector<double>> component_psi;
    for (std::size_t b : bases) component_psi.push_back(component_potential(cg, b));
    g.connectors = connector_costs(cg, bases);
    std::vector<std::size_t> label;
    for (std::size_t t = 0; t < atom_of_target.size(); ++t) label.push_back(graph.component[atom_of_target[t]]);
    on_targets = global_psi(component_psi, g.connectors, label);
    g.gluing = "paths";
  }
  g.psi.assign(k, kNegInfinity);
  for (std::size_t t = 0; t < on_targets.size(); ++t) g.psi[atom_of_target[t]] = on_targets[t];
  return g;
}

struct DiscreteCertificate {
  SubdifferentialVerdict verdict;
  double worst_constraint = -kInf;
  double worst_gamma_gap = 0.0;
  std::vector<double> phi_c;
};

DiscreteCertificate certify(const Glued& glued, const AtomicMeasure& lambda_d, const AtomicMeasure& mu_d,
                            const std::vector<std::pair<UnitVector, UnitVector>>& gamma, std::uint64_t seed) {
  DiscreteCertificate c;
  if (std::any_of(glued.psi.begin(), glued.psi.end(), [](double v) { return !std::isfinite(v); })) {
    c.worst_gamma_gap = kInf;
    c.worst_constraint = kInf;
    return c;
  }
  const auto phi = potential_phi(glued.psi, mu_d.atoms());
  const auto body = oliker_transform(mu_d.atoms(), glued.psi);
  auto phi_c = [&](const UnitVector& x) { return std::log(radial_function(body, x)); };
  c.verdict = verify_subdifferential(gamma, phi, phi_c, mu_d.atoms(), 1000, seed);
  for (const auto& x : mu_d.atoms()) c.phi_c.push_back(phi_c(x));
  for (std::size_t i = 0; i < lambda_d.size(); ++i) {
    const double phi_i = phi(lambda_d.atom(i));
    for (std::size_t j = 0; j < mu_d.size(); ++j) {
      const double cost = cost_value(lambda_d.atom(i), mu_d.atom(j));
      if (std::isfinite(cost)) c.worst_constraint = std::max(c.worst_constraint, phi_i + glued.psi[j] - cost);
    }
  }
  for (const auto& [n, x] : gamma) {
    const auto j = static_cast<std::size_t>(std::find(mu_d.atoms().begin(), mu_d.atoms().end(), x) - mu_d.atoms().begin());
    c.worst_gamma_gap = std::max(c.worst_gamma_gap, std::abs(phi(n) + glued.psi[j] - cost_value(n, x)));
  }
  return c;
}

}  // namespace

SolveReport run_verification(const ConvexBodyRep& body, const DensityMeasure& lambda, const AtomicMeasure& mu,
                             const SolveConfig& config) {
  if (body.size() != mu.size() || body.ambient_dim() != mu.ambient_dim() || lambda.ambient_dim() != mu.ambient_dim()) {
    throw Error(ErrorCode::VertexSetMismatch, "body, lambda and mu do not share a vertex set");
  }
  // vertex_of[j]: body index of atom j.
  std::vector<std::size_t> vertex_of(mu.size(), body.size());
  for (std::size_t j = 0; j < mu.size(); ++j) {
    for (std::size_t b = 0; b < body.size(); ++b) {
      bool same = true;
      for (std::size_t c = 0; c < mu.ambient_dim() && same; ++c) {
        same = std::abs(mu.atom(j)[c] - body.directions()[b][c]) <= 1e-12;
      }
      if (same) vertex_of[j] = b;
    }
    if (vertex_of[j] == body.size()) throw Error(ErrorCode::VertexSetMismatch, "atom " + std::to_string(j) + " is not a vertex direction");
  }

  SolveReport r;
  r.target_atoms = mu.size();
  r.inradius = body.inradius();
  r.circumradius = body.circumradius();
  auto start = Clock::now();
  const bool exact = lambda.exact_on_circle() || lambda.exact_on_sphere2();
  r.pushforward = gauss_image_measure(body, lambda, exact ? IntegrationMode::Exact : IntegrationMode::MonteCarlo,
                                      config.samples, config.seed);
  double worst_ratio = 0.0, worst = 0.0;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    const double w = r.pushforward.weights[vertex_of[j]];
    const double err = w - mu.weight(j);
    r.pushforward_error.push_back(err);
    worst = std::max(worst, std::abs(err));
    if (!exact) {
      const double n = static_cast<double>(config.samples);
      const double sigma = std::max(std::sqrt(mu.weight(j) * (1 - mu.weight(j)) / n), r.pushforward.std_errors[vertex_of[j]]);
      worst_ratio = std::max(worst_ratio, std::abs(err) / (3 * sigma));
    }
  }
  if (exact) {
    r.checks.push_back({"pushforward", worst <= config.exact_pushforward_tolerance, worst,
                        config.exact_pushforward_tolerance, "exact normal-cone masses"});
  } else {
    r.checks.push_back({"pushforward", worst_ratio <= 1.0, worst_ratio, 1.0,
                        "largest |error| / (3 standard errors), N = " + std::to_string(config.samples)});
  }
  r.timings["pushforward"] = elapsed_ms(start);

  r.swallowed = body.swallowed(1e-9);
  r.checks.push_back({"vertices_extreme", r.swallowed.empty(), static_cast<double>(r.swallowed.size()), 0.0,
                      "directions whose radius is not on the boundary"});

  // Pairs (n, T_K(n)) of the semi-discrete plan.
  start = Clock::now();
  std::vector<std::pair<UnitVector, UnitVector>> pairs;
  auto rng = block_engine(config.seed, 7);
  for (std::size_t s = 0; s < 1000; ++s) {
    const UnitVector n = lambda.sample(rng);
    const auto t = pushforward_map(body, n);
    if (!t.tie) pairs.emplace_back(n, body.directions()[t.vertex]);
  }
  r.angle = angle_bound_check(body, pairs);
  r.checks.push_back({"angle_bound", r.angle.holds, r.angle.min_inner, r.angle.epsilon_prime,
                      "min <n, x> over matched pairs against epsilon'"});
  const auto phi = potential_phi(oliker_inverse(body), body.directions());
  auto phi_c = [&](const UnitVector& x) { return std::log(radial_function(body, x)); };
  const auto sub = verify_subdifferential(pairs, phi, phi_c, body.directions(), 1000, config.seed);
  r.checks.push_back({"body_subdifferential", sub.passed, std::max({sub.worst_constraint, sub.worst_gamma_gap, sub.worst_cc_error}),
                      1e-9, "matched pairs lie in the c-subdifferential of -ln h"});
  r.timings["verification"] = elapsed_ms(start);

  r.status = std::all_of(r.checks.begin(), r.checks.end(), [](const CheckResult& c) { return c.passed; })
                 ? SolveStatus::Solved
                 : SolveStatus::FailedVerification;
  return r;
}

Solution solve_gauss_image(const DensityMeasure& lambda, const AtomicMeasure& mu, const SolveConfig& config) {
  if (lambda.ambient_dim() != mu.ambient_dim()) throw Error(ErrorCode::DimensionMismatch, "lambda and mu differ");
  config.validate(mu.size());
  std::map<std::string, double> timings;
  auto start = Clock::now();
  const auto hemisphere = check_hemisphere_concentration(mu);
  if (hemisphere.concentrated) throw ConcentratedTargetError(*hemisphere.witness);

  AlphaChoice choice;
  if (config.alpha) {
    choice.weak = weak_aleksandrov_at(mu, lambda, *config.alpha, config.seed);
    if (!choice.weak.holds) throw WeakAleksandrovError(choice.weak, *config.alpha);
    timings["conditions"] = elapsed_ms(start);
    start = Clock::now();
    choice.d = discretize_at(lambda, mu, *config.alpha, config);
    timings["discretize_and_hall"] = elapsed_ms(start);
  } else {
    // The search already discretized and matched at the chosen alpha.
    choice = search_alpha(lambda, mu, config);
    timings["conditions"] = elapsed_ms(start);
  }
  const double alpha = choice.d.alpha;
  auto& weak = choice.weak;
  auto& d = choice.d;

  start = Clock::now();
  SimplexOptions options;
  options.pivot_seed = config.pivot_seed;
  SimplexStats stats;
  auto [plan, dual] = optimal_plan(d.lambda_d, d.mu_d, d.hall, options, &stats);
  timings["simplex"] = elapsed_ms(start);

  start = Clock::now();
  std::vector<std::pair<UnitVector, UnitVector>> gamma;
  for (const auto& e : plan.entries) gamma.emplace_back(d.lambda_d.atom(e.i), d.mu_d.atom(e.j));
  const auto graph = build_graph(plan, d.hall, alpha);
  const CPathGraph cg(gamma);
  auto glued = glue_potential(cg, plan, graph, false);
  auto cert = certify(glued, d.lambda_d, d.mu_d, gamma, config.seed);
  if (cert.worst_gamma_gap > config.gamma_tolerance || cert.worst_constraint > config.constraint_tolerance) {
    glued = glue_potential(cg, plan, graph, true);
    cert = certify(glued, d.lambda_d, d.mu_d, gamma, config.seed);
  }
  timings["potential"] = elapsed_ms(start);

  // Initial log radii on the original atoms from their merged atoms.
  std::vector<double> psi0;
  for (const auto& x : mu.atoms()) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < d.mu_d.size(); ++j) {
      if (dot(x, d.mu_d.atom(j)) > dot(x, d.mu_d.atom(best))) best = j;
    }
    psi0.push_back(glued.psi[best]);
  }
  start = Clock::now();
  PolishResult polished;
  polished.psi = psi0;
  polished.applicable = false;
  if (config.polish) polished = polish_radii(mu.atoms(), psi0, mu.weights(), lambda);
  timings["polish"] = elapsed_ms(start);

  auto body = oliker_transform(mu.atoms(), polished.psi);
  SolveReport r = run_verification(body, lambda, mu, config);
  for (const auto& [k, v] : timings) r.timings[k] = v;
  r.alpha = alpha;
  r.cells = d.cells;
  r.source_atoms = d.lambda_d.size();
  r.target_atoms = d.mu_d.size();
  r.denominator = plan.denominator;
  r.weak_aleksandrov = weak.holds;
  r.weak_aleksandrov_certifying = weak.certifying;
  r.primal_cost = plan_cost(plan).value();
  r.dual_value = dual_value(plan, dual);
  r.duality_gap = r.primal_cost - r.dual_value;
  r.simplex = stats;
  r.support_size = gamma.size();
  r.components = graph.component_count;
  r.every_vertex_on_cycle = graph.every_vertex_on_cycle;
  r.hop_bound = graph.hop_bound_holds;
  r.max_hops = graph.max_hops;
  r.connectors = glued.connectors;
  r.gluing = glued.gluing;
  r.psi_bound = psi_upper_bound(graph.vertices.size(), alpha);
  r.psi_max = *std::max_element(glued.psi.begin(), glued.psi.end());
  r.subdifferential = cert.verdict;
  r.worst_constraint = cert.worst_constraint;
  r.worst_gamma_gap = cert.worst_gamma_gap;
  r.polish = polished;
  start = Clock::now();
  r.monotonicity = check_cyclical_monotonicity(gamma, 4, 100'000, config.seed);
  r.timings["monotonicity"] = elapsed_ms(start);

  const double scale = 1 + std::abs(r.primal_cost);
  std::vector<CheckResult> discrete{
      {"duality_gap", r.duality_gap >= -1e-12 * scale && r.duality_gap <= 1e-8 * scale, r.duality_gap, 1e-8 * scale,
       "primal cost minus dual value"},
      {"constraints", r.worst_constraint <= config.constraint_tolerance, r.worst_constraint,
       config.constraint_tolerance, "max phi_i + psi_j - c_ij over finite-cost pairs"},
      {"gamma_equality", r.worst_gamma_gap <= config.gamma_tolerance, r.worst_gamma_gap, config.gamma_tolerance,
       "max |phi_i + psi_j - c_ij| over the support"},
      {"subdifferential", cert.verdict.passed, cert.verdict.worst_cc_error, 1e-9,
       "sampled constraints, support equality and phi^cc = phi"},
      {"monotonicity", r.monotonicity.monotone, r.monotonicity.worst_slack, -1e-9,
       r.monotonicity.exhaustive ? "all cycles of length <= 4" : "sampled cycles of length <= 4"},
  };
  r.checks.insert(r.checks.begin(), discrete.begin(), discrete.end());
  r.status = std::all_of(r.checks.begin(), r.checks.end(), [](const CheckResult& c) { return c.passed; })
                 ? SolveStatus::Solved
                 : SolveStatus::FailedVerification;

  Solution s{std::move(body),        std::move(r),    std::move(d.lambda_d), std::move(d.mu_d),
             std::move(d.hall),      std::move(plan), std::move(dual),       std::move(glued.psi),
             std::move(cert.phi_c), std::move(gamma)};
  return s;
}

}  // namespace gip
