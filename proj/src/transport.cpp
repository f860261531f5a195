#include "gip/transport.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#include "gip/matching.hpp"

namespace gip {

namespace {

// Weights as integer units of 1/denominator: exact when the denominator is a
// multiple of every weight denominator, rounded otherwise.
std::vector<std::int64_t> units_of(const AtomicMeasure& m, std::int64_t denominator, double& perturbation) {
  if (m.is_rational()) {
    std::vector<std::int64_t> out;
    bool exact = true;
    for (const auto& w : m.exact_weights()) {
      if (denominator % w.denominator() != 0) {
        exact = false;
        break;
      }
      out.push_back(w.numerator() * (denominator / w.denominator()));
    }
    if (exact && std::accumulate(out.begin(), out.end(), std::int64_t{0}) == denominator) return out;
  }
  double p = 0.0;
  auto out = round_to_units(m.weights(), denominator, &p);
  perturbation += p;
  return out;
}

double admissible_radius(double alpha) { return std::numbers::pi / 2 - alpha; }

}  // namespace

void TransportPlan::normalize() {
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
  std::vector<Entry> merged;
  for (const auto& e : entries) {
    if (!merged.empty() && merged.back().i == e.i && merged.back().j == e.j) {
      merged.back().units += e.units;
    } else {
      merged.push_back(e);
    }
  }
  std::erase_if(merged, [](const Entry& e) { return e.units == 0; });
  entries = std::move(merged);
}

void TransportPlan::check_marginals() const {
  std::vector<std::int64_t> rows(source.size(), 0), cols(target.size(), 0);
  for (const auto& e : entries) {
    if (e.units < 0) throw Error(ErrorCode::MarginalMismatch, "negative plan mass");
    if (e.i >= rows.size() || e.j >= cols.size()) throw Error(ErrorCode::MarginalMismatch, "entry out of range");
    rows[e.i] += e.units;
    cols[e.j] += e.units;
  }
  if (rows != source_units) throw Error(ErrorCode::MarginalMismatch, "row sums differ from the source weights");
  if (cols != target_units) throw Error(ErrorCode::MarginalMismatch, "column sums differ from the target weights");
}

TransportPlan make_plan(const AtomicMeasure& source, const AtomicMeasure& target,
                        const std::vector<std::tuple<std::size_t, std::size_t, Fraction>>& masses) {
  TransportPlan p;
  p.source = source;
  p.target = target;
  std::int64_t d = 1;
  for (const auto& [i, j, m] : masses) d = std::lcm(d, m.denominator());
  p.denominator = d;
  for (const auto& [i, j, m] : masses) p.entries.push_back({i, j, m.numerator() * (d / m.denominator())});
  p.normalize();
  p.source_units.assign(source.size(), 0);
  p.target_units.assign(target.size(), 0);
  for (const auto& e : p.entries) {
    p.source_units.at(e.i) += e.units;
    p.target_units.at(e.j) += e.units;
  }
  // Marginals must agree with the measures' own weights.
  for (std::size_t i = 0; i < source.size(); ++i) {
    const double w = static_cast<double>(p.source_units[i]) / static_cast<double>(d);
    if (std::abs(w - source.weight(i)) > 1e-12) throw Error(ErrorCode::MarginalMismatch, "source marginal");
  }
  for (std::size_t j = 0; j < target.size(); ++j) {
    const double w = static_cast<double>(p.target_units[j]) / static_cast<double>(d);
    if (std::abs(w - target.weight(j)) > 1e-12) throw Error(ErrorCode::MarginalMismatch, "target marginal");
  }
  return p;
}

std::int64_t common_units(const AtomicMeasure& a, const AtomicMeasure& b, std::int64_t cap) {
  if (!a.is_rational() || !b.is_rational()) return 0;
  std::int64_t l = 1;
  for (const auto* m : {&a, &b}) {
    for (const auto& w : m->exact_weights()) {
      l = std::lcm(l, w.denominator());
      if (l > cap) return 0;
    }
  }
  return l;
}

NoFeasiblePlanError::NoFeasiblePlanError(std::vector<std::size_t> deficient, std::vector<std::size_t> neighbourhood,
                                         double deficit)
    : Error(ErrorCode::NoFeasiblePlan, "target atoms " + std::to_string(deficient.size()) +
                                           " outweigh their admissible sources by " + std::to_string(deficit)),
      deficient_(std::move(deficient)),
      neighbourhood_(std::move(neighbourhood)),
      deficit_(deficit) {}

namespace {

TransportPlan empty_plan(const AtomicMeasure& lambda_d, const AtomicMeasure& mu_d) {
  require_same_dim(lambda_d.atom(0), mu_d.atom(0));
  TransportPlan plan;
  plan.source = lambda_d;
  plan.target = mu_d;
  std::int64_t d = common_units(lambda_d, mu_d);
  if (d == 0) {
    // Fallback: round both sides to the unit cap.
    d = kMaxUnits;
  }
  plan.denominator = d;
  plan.source_units = units_of(lambda_d, d, plan.rounding_perturbation);
  plan.target_units = units_of(mu_d, d, plan.rounding_perturbation);
  return plan;
}

}  // namespace

TransportPlan hall_feasible_plan(const AtomicMeasure& lambda_d, const AtomicMeasure& mu_d, double alpha) {
  if (lambda_d.size() == 0 || mu_d.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty measure");
  TransportPlan plan = empty_plan(lambda_d, mu_d);
  const std::size_t l = lambda_d.size(), p = mu_d.size();
  const std::size_t s = 0, t = 1 + p + l;
  MaxFlow flow(p + l + 2);
  for (std::size_t j = 0; j < p; ++j) flow.add_arc(s, 1 + j, plan.target_units[j]);
  const double radius = admissible_radius(alpha);
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> pair_arcs;
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < l; ++i) {
      if (spherical_distance(lambda_d.atom(i), mu_d.atom(j)) <= radius) {
        pair_arcs.emplace_back(i, j, flow.add_arc(1 + j, 1 + p + i, MaxFlow::kInfinite));
      }
    }
  }
  for (std::size_t i = 0; i < l; ++i) flow.add_arc(1 + p + i, t, plan.source_units[i]);
  const std::int64_t value = flow.run(s, t);
  if (value < plan.denominator) {
    const auto side = flow.source_side(s);
    std::vector<std::size_t> deficient, neighbourhood;
    std::int64_t excess = 0;
    for (std::size_t j = 0; j < p; ++j) {
      if (side[1 + j]) {
        deficient.push_back(j);
        excess += plan.target_units[j];
      }
    }
    for (std::size_t i = 0; i < l; ++i) {
      if (side[1 + p + i]) {
        neighbourhood.push_back(i);
        excess -= plan.source_units[i];
      }
    }
    throw NoFeasiblePlanError(std::move(deficient), std::move(neighbourhood),
                              static_cast<double>(excess) / static_cast<double>(plan.denominator));
  }
  for (const auto& [i, j, arc] : pair_arcs) {
    if (const auto f = flow.flow(arc); f > 0) plan.entries.push_back({i, j, f});
  }
  plan.normalize();
  return plan;
}

TransportPlan hall_feasible_plan_by_matching(const AtomicMeasure& lambda_d, const AtomicMeasure& mu_d, double alpha) {
  if (lambda_d.size() == 0 || mu_d.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty measure");
  TransportPlan plan = empty_plan(lambda_d, mu_d);
  const auto d = static_cast<std::size_t>(plan.denominator);
  std::vector<std::size_t> right_atom, left_atom;
  std::vector<std::size_t> first_right(lambda_d.size() + 1, 0);
  for (std::size_t i = 0; i < lambda_d.size(); ++i) {
    first_right[i] = right_atom.size();
    for (std::int64_t u = 0; u < plan.source_units[i]; ++u) right_atom.push_back(i);
  }
  first_right[lambda_d.size()] = right_atom.size();
  for (std::size_t j = 0; j < mu_d.size(); ++j) {
    for (std::int64_t u = 0; u < plan.target_units[j]; ++u) left_atom.push_back(j);
  }
  const double radius = admissible_radius(alpha);
  std::vector<std::vector<std::size_t>> atom_adj(mu_d.size());
  for (std::size_t j = 0; j < mu_d.size(); ++j) {
    for (std::size_t i = 0; i < lambda_d.size(); ++i) {
      if (spherical_distance(lambda_d.atom(i), mu_d.atom(j)) <= radius) {
        for (std::size_t r = first_right[i]; r < first_right[i + 1]; ++r) atom_adj[j].push_back(r);
      }
    }
  }
  std::vector<std::vector<std::size_t>> adjacency(d);
  for (std::size_t u = 0; u < d; ++u) adjacency[u] = atom_adj[left_atom[u]];
  const auto m = hopcroft_karp(d, adjacency);
  if (m.size < d) {
    std::vector<bool> in_j(mu_d.size(), false), in_n(lambda_d.size(), false);
    for (std::size_t u : hall_violator(adjacency, m)) {
      in_j[left_atom[u]] = true;
      for (std::size_t r : adjacency[u]) in_n[right_atom[r]] = true;
    }
    std::vector<std::size_t> deficient, neighbourhood;
    std::int64_t excess = 0;
    for (std::size_t j = 0; j < mu_d.size(); ++j) {
      if (in_j[j]) {
        deficient.push_back(j);
        excess += plan.target_units[j];
      }
    }
    for (std::size_t i = 0; i < lambda_d.size(); ++i) {
      if (in_n[i]) {
        neighbourhood.push_back(i);
        excess -= plan.source_units[i];
      }
    }
    throw NoFeasiblePlanError(std::move(deficient), std::move(neighbourhood),
                              static_cast<double>(excess) / static_cast<double>(plan.denominator));
  }
  for (std::size_t u = 0; u < d; ++u) plan.entries.push_back({right_atom[m.left_to_right[u]], left_atom[u], 1});
  plan.normalize();
  return plan;
}

ExtendedCost plan_cost(const TransportPlan& plan) {
  double total = 0.0;
  for (const auto& e : plan.entries) {
    const double c = cost_value(plan.source.atom(e.i), plan.target.atom(e.j));
    if (!std::isfinite(c)) return ExtendedCost::infinite();
    total += plan.mass(e) * c;
  }
  return ExtendedCost(total);
}

double dual_value(const TransportPlan& plan, const DualSolution& dual) {
  const double d = static_cast<double>(plan.denominator);
  double v = 0.0;
  for (std::size_t i = 0; i < plan.source_units.size(); ++i) v += static_cast<double>(plan.source_units[i]) / d * dual.phi[i];
  for (std::size_t j = 0; j < plan.target_units.size(); ++j) v += static_cast<double>(plan.target_units[j]) / d * dual.psi[j];
  return v;
}

MonotonicityVerdict check_cyclical_monotonicity(const std::vector<std::pair<UnitVector, UnitVector>>& pairs,
                                                std::size_t max_cycle, std::size_t random_cycles,
                                                std::uint64_t seed) {
  if (max_cycle == 0 || max_cycle > 4) throw Error(ErrorCode::InvalidArgument, "cycle length must be in 1..4");
  constexpr double kSlack = -1e-9;
  const std::size_t n = pairs.size();
  MonotonicityVerdict v;
  if (n == 0) return v;
  // w[a][b] = c(n_b, x_a) - c(n_a, x_a): the cost change when x_a is sent to n_b.
  std::vector<double> base(n);
  for (std::size_t a = 0; a < n; ++a) {
    base[a] = cost_value(pairs[a].first, pairs[a].second);
    if (!std::isfinite(base[a])) throw Error(ErrorCode::InvalidArgument, "pair with infinite cost");
  }
  auto w = [&](std::size_t a, std::size_t b) { return cost_value(pairs[b].first, pairs[a].second) - base[a]; };
  auto weight = [&](const std::vector<std::size_t>& cycle) {
    double s = 0.0;
    for (std::size_t k = 0; k < cycle.size(); ++k) {
      const std::size_t a = cycle[k], b = cycle[(k + 1) % cycle.size()];
      if (a != b) s += w(a, b);
    }
    return s;
  };
  // A closed walk splits at a repeated pair into two shorter closed walks;
  // keeping the lighter one ends at a simple cycle no heavier than the walk.
  auto simple_cycle = [&](std::vector<std::size_t> cycle) {
    for (bool split = true; split;) {
      split = false;
      for (std::size_t k = 0; k < cycle.size() && !split; ++k) {
        for (std::size_t l = k + 1; l < cycle.size() && !split; ++l) {
          if (cycle[k] != cycle[l]) continue;
          std::vector<std::size_t> inner(cycle.begin() + static_cast<std::ptrdiff_t>(k),
                                         cycle.begin() + static_cast<std::ptrdiff_t>(l));
          std::vector<std::size_t> outer(cycle.begin() + static_cast<std::ptrdiff_t>(l), cycle.end());
          outer.insert(outer.end(), cycle.begin(), cycle.begin() + static_cast<std::ptrdiff_t>(k));
          cycle = weight(inner) <= weight(outer) ? std::move(inner) : std::move(outer);
          split = true;
        }
      }
    }
    return cycle;
  };
  auto record = [&](double slack, std::vector<std::size_t> cycle) {
    if (slack < v.worst_slack) {
      cycle = simple_cycle(std::move(cycle));
      slack = weight(cycle);
    }
    if (slack < v.worst_slack) {
      v.worst_slack = slack;
      if (slack < kSlack) {
        v.monotone = false;
        v.cycle = std::move(cycle);
      }
    }
  };

  if (n <= 200) {
    std::vector<double> W(n * n);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) W[a * n + b] = a == b ? 0.0 : w(a, b);
    }
    for (std::size_t a = 0; a < n && max_cycle >= 2; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) record(W[a * n + b] + W[b * n + a], {a, b});
    }
    if (max_cycle >= 3) {
      // Min-plus square: best two-step route a -> b -> c with its midpoint.
      const double inf = std::numeric_limits<double>::infinity();
      std::vector<double> M(n * n, inf);
      std::vector<std::size_t> mid(n * n, 0);
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
          const double ab = W[a * n + b];
          if (!std::isfinite(ab)) continue;
          for (std::size_t c = 0; c < n; ++c) {
            const double s = ab + W[b * n + c];
            if (s < M[a * n + c]) {
              M[a * n + c] = s;
              mid[a * n + c] = b;
            }
          }
        }
      }
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t c = 0; c < n; ++c) {
          record(M[a * n + c] + W[c * n + a], {a, mid[a * n + c], c});
          if (max_cycle >= 4) record(M[a * n + c] + M[c * n + a], {a, mid[a * n + c], c, mid[c * n + a]});
        }
      }
    }
    return v;
  }

  v.exhaustive = false;
  auto rng = block_engine(seed, 0);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::uniform_int_distribution<std::size_t> len(2, std::max<std::size_t>(2, max_cycle));
  for (std::size_t t = 0; t < random_cycles && max_cycle >= 2; ++t) {
    std::vector<std::size_t> cycle(len(rng));
    for (auto& a : cycle) a = pick(rng);
    double s = 0.0;
    for (std::size_t k = 0; k < cycle.size(); ++k) s += w(cycle[k], cycle[(k + 1) % cycle.size()]);
    record(s, std::move(cycle));
  }
  return v;
}

CycleDecomposition decompose_cycles(const TransportPlan& pi_o, const TransportPlan& pi_alpha) {
  const std::int64_t d = std::lcm(pi_o.denominator, pi_alpha.denominator);
  const std::int64_t so = d / pi_o.denominator, sa = d / pi_alpha.denominator;
  pi_o.check_marginals();
  pi_alpha.check_marginals();
  const std::size_t l = pi_o.source_units.size(), p = pi_o.target_units.size();
  if (pi_alpha.source_units.size() != l || pi_alpha.target_units.size() != p) {
    throw Error(ErrorCode::MarginalMismatch, "plans have different atom counts");
  }
  for (std::size_t i = 0; i < l; ++i) {
    if (pi_o.source_units[i] * so != pi_alpha.source_units[i] * sa) {
      throw Error(ErrorCode::MarginalMismatch, "source marginals differ");
    }
  }
  for (std::size_t j = 0; j < p; ++j) {
    if (pi_o.target_units[j] * so != pi_alpha.target_units[j] * sa) {
      throw Error(ErrorCode::MarginalMismatch, "target marginals differ");
    }
  }
  // rows[i] : j -> units of pi_o;  cols[j] : i -> units of pi_alpha.
  std::vector<std::map<std::size_t, std::int64_t>> rows(l), cols(p);
  for (const auto& e : pi_o.entries) rows[e.i][e.j] += e.units * so;
  for (const auto& e : pi_alpha.entries) cols[e.j][e.i] += e.units * sa;

  CycleDecomposition out;
  out.denominator = d;
  std::size_t start = 0;
  for (;;) {
    while (start < l && rows[start].empty()) ++start;
    if (start == l) break;
    ++out.iterations;
    // Walk i -> (i, j) in pi_o -> (i', j) in pi_alpha until a source repeats.
    std::vector<std::size_t> seen_at(l, kUnmatched);
    std::vector<std::pair<std::size_t, std::size_t>> walk;
    std::size_t i = start;
    while (seen_at[i] == kUnmatched) {
      seen_at[i] = walk.size();
      const std::size_t j = rows[i].begin()->first;
      walk.emplace_back(i, j);
      i = cols[j].begin()->first;
    }
    std::vector<std::pair<std::size_t, std::size_t>> cycle(walk.begin() + static_cast<std::ptrdiff_t>(seen_at[i]),
                                                           walk.end());
    std::int64_t m = INT64_MAX;
    for (std::size_t u = 0; u < cycle.size(); ++u) {
      const auto [iu, ju] = cycle[u];
      const std::size_t next_i = cycle[(u + 1) % cycle.size()].first;
      m = std::min({m, rows[iu].at(ju), cols[ju].at(next_i)});
    }
    for (std::size_t u = 0; u < cycle.size(); ++u) {
      const auto [iu, ju] = cycle[u];
      const std::size_t next_i = cycle[(u + 1) % cycle.size()].first;
      if ((rows[iu][ju] -= m) == 0) rows[iu].erase(ju);
      if ((cols[ju][next_i] -= m) == 0) cols[ju].erase(next_i);
    }
    out.cycles.push_back({std::move(cycle), m});
  }
  return out;
}

}  // namespace gip
