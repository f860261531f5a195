#include "gip/potential.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

namespace gip {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

void require_same_marginals(const TransportPlan& a, const TransportPlan& b) {
  if (a.source.atoms() != b.source.atoms() || a.target.atoms() != b.target.atoms()) {
    throw Error(ErrorCode::MarginalMismatch, "plans live on different atoms");
  }
  auto same = [&](const std::vector<std::int64_t>& ua, const std::vector<std::int64_t>& ub) {
    for (std::size_t k = 0; k < ua.size(); ++k) {
      if (Fraction(ua[k], a.denominator) != Fraction(ub[k], b.denominator)) return false;
    }
    return ua.size() == ub.size();
  };
  if (!same(a.source_units, b.source_units) || !same(a.target_units, b.target_units)) {
    throw Error(ErrorCode::MarginalMismatch, "plans have different marginals");
  }
}

// Strongly connected component sizes by Tarjan's algorithm without recursion.
std::vector<std::size_t> scc_sizes(const std::vector<std::vector<std::size_t>>& adj) {
  const std::size_t n = adj.size();
  std::vector<std::size_t> index(n, kNone), low(n, 0), comp(n, kNone), it(n, 0);
  std::vector<std::size_t> stack, call;
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> sizes;
  std::size_t counter = 0;
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kNone) continue;
    call.push_back(root);
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      const std::size_t v = call.back();
      if (it[v] < adj[v].size()) {
        const std::size_t w = adj[v][it[v]++];
        if (index[w] == kNone) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back(w);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      call.pop_back();
      if (!call.empty()) low[call.back()] = std::min(low[call.back()], low[v]);
      if (low[v] == index[v]) {
        std::size_t size = 0;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = sizes.size();
          ++size;
        } while (w != v);
        sizes.push_back(size);
      }
    }
  }
  std::vector<std::size_t> out(n);
  for (std::size_t v = 0; v < n; ++v) out[v] = sizes[comp[v]];
  return out;
}

}  // namespace

bool SupportGraph::primal_edge(std::size_t a, std::size_t b) const {
  const auto& list = alpha_sources.at(vertices.at(a).second);
  return std::binary_search(list.begin(), list.end(), vertices.at(b).first);
}

bool SupportGraph::enlarged_edge(std::size_t a, std::size_t b) const {
  return spherical_distance(source_atoms.at(vertices.at(b).first), target_atoms.at(vertices.at(a).second)) <
         std::numbers::pi / 2 - alpha / 4;
}

std::vector<std::size_t> chain_components(const std::vector<UnitVector>& atoms, double kappa) {
  const std::size_t n = atoms.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (spherical_distance(atoms[a], atoms[b]) < kappa) {
        const std::size_t ra = find_root(parent, a), rb = find_root(parent, b);
        if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
      }
    }
  }
  std::vector<std::size_t> label(n, kNone), by_root(n, kNone);
  std::size_t next = 0;
  for (std::size_t a = 0; a < n; ++a) {
    const std::size_t r = find_root(parent, a);
    if (by_root[r] == kNone) by_root[r] = next++;
    label[a] = by_root[r];
  }
  return label;
}

SupportGraph build_graph(const TransportPlan& pi_o, const TransportPlan& pi_alpha, double alpha,
                         std::size_t hop_sources) {
  require_same_marginals(pi_o, pi_alpha);
  SupportGraph g;
  g.alpha = alpha;
  g.source_atoms = pi_o.source.atoms();
  g.target_atoms = pi_o.target.atoms();
  const std::size_t l = g.source_atoms.size();
  const std::size_t k = g.target_atoms.size();
  for (const auto& e : pi_o.entries) g.vertices.emplace_back(e.i, e.j);
  g.alpha_sources.assign(k, {});
  const double enlarged = std::numbers::pi / 2 - alpha / 4;
  g.primal_within_enlarged = true;
  for (const auto& e : pi_alpha.entries) {
    g.alpha_sources[e.j].push_back(e.i);
    if (spherical_distance(g.source_atoms[e.i], g.target_atoms[e.j]) >= enlarged) g.primal_within_enlarged = false;
  }
  for (auto& list : g.alpha_sources) std::sort(list.begin(), list.end());
  g.component = chain_components(g.target_atoms, alpha / 4);
  g.component_count = g.component.empty() ? 0 : *std::max_element(g.component.begin(), g.component.end()) + 1;

  // Vertex a -> target node T_j -> source node S_u -> every vertex with source u.
  const std::size_t nv = g.vertices.size();
  std::vector<std::vector<std::size_t>> by_source(l);
  for (std::size_t a = 0; a < nv; ++a) by_source[g.vertices[a].first].push_back(a);
  auto compressed = [&](const std::vector<std::vector<std::size_t>>& target_to_sources) {
    std::vector<std::vector<std::size_t>> adj(nv + k + l);
    for (std::size_t a = 0; a < nv; ++a) adj[a].push_back(nv + g.vertices[a].second);
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t u : target_to_sources[j]) adj[nv + j].push_back(nv + k + u);
    }
    for (std::size_t u = 0; u < l; ++u) adj[nv + k + u] = by_source[u];
    return adj;
  };

  const auto primal = compressed(g.alpha_sources);
  const auto sizes = scc_sizes(primal);
  g.every_vertex_on_cycle = std::all_of(sizes.begin(), sizes.begin() + static_cast<std::ptrdiff_t>(nv),
                                        [](std::size_t s) { return s > 1; });

  std::vector<std::vector<std::size_t>> near(k);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t u = 0; u < l; ++u) {
      if (!by_source[u].empty() && spherical_distance(g.source_atoms[u], g.target_atoms[j]) < enlarged) {
        near[j].push_back(u);
      }
    }
  }
  const auto wide = compressed(near);
  g.hop_bound_holds = true;
  const std::size_t starts = std::min(hop_sources, nv);
  std::vector<std::size_t> dist(wide.size());
  for (std::size_t s = 0; s < starts; ++s) {
    const std::size_t a = s * nv / starts;
    std::fill(dist.begin(), dist.end(), kNone);
    std::deque<std::size_t> q{a};
    dist[a] = 0;
    while (!q.empty()) {
      const std::size_t v = q.front();
      q.pop_front();
      for (std::size_t w : wide[v]) {
        if (dist[w] == kNone) {
          dist[w] = dist[v] + 1;
          q.push_back(w);
        }
      }
    }
    const std::size_t ca = g.component[g.vertices[a].second];
    for (std::size_t b = 0; b < nv; ++b) {
      if (g.component[g.vertices[b].second] != ca) continue;
      if (dist[b] == kNone) {
        g.hop_bound_holds = false;
        continue;
      }
      g.max_hops = std::max(g.max_hops, dist[b] / 3);
    }
  }
  if (g.max_hops > nv) g.hop_bound_holds = false;
  return g;
}

NegativeCycleError::NegativeCycleError(std::vector<std::size_t> cycle, double weight)
    : Error(ErrorCode::NegativeCycle, "c-path cycle of weight " + std::to_string(weight) + " through " +
                                          std::to_string(cycle.size()) + " pairs"),
      cycle_(std::move(cycle)),
      weight_(weight) {}

CPathGraph::CPathGraph(std::vector<std::pair<UnitVector, UnitVector>> pairs) : pairs_(std::move(pairs)) {
  target_of_.reserve(pairs_.size());
  for (const auto& [n, x] : pairs_) {
    const double c = cost_value(n, x);
    if (!std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "pair of infinite cost");
    self_cost_.push_back(c);
    const auto found = std::find(targets_.begin(), targets_.end(), x);
    target_of_.push_back(static_cast<std::size_t>(found - targets_.begin()));
    if (found == targets_.end()) targets_.push_back(x);
  }
  const std::size_t k = targets_.size();
  step_.assign(k * k, kInf);
  step_pair_.assign(k * k, kNone);
  for (std::size_t b = 0; b < pairs_.size(); ++b) {
    const std::size_t t = target_of_[b];
    for (std::size_t z = 0; z < k; ++z) {
      const double c = cost_value(pairs_[b].first, targets_[z]);
      if (!std::isfinite(c)) continue;
      const double w = c - self_cost_[b];
      if (w < step_[z * k + t]) {
        step_[z * k + t] = w;
        step_pair_[z * k + t] = b;
      }
    }
  }
}

double CPathGraph::Paths::to_pair(const CPathGraph& g, std::size_t b) const {
  if (b == base) return 0.0;
  double best = kInf;
  for (std::size_t z = 0; z < target_value.size(); ++z) {
    if (target_value[z] == kInf) continue;
    best = std::min(best, target_value[z] + cost_value(g.pairs_[b].first, g.targets_[z]));
  }
  return best;
}

CPathGraph::Paths CPathGraph::from(std::size_t base) const {
  const std::size_t k = targets_.size();
  Paths p;
  p.base = base;
  p.target_value.assign(k, kInf);
  p.target_value[target_of_.at(base)] = -self_cost_[base];
  return relax_from(std::move(p));
}

CPathGraph::Paths CPathGraph::from_every_pair() const {
  Paths p;
  p.base = pairs_.size();
  p.target_value.assign(targets_.size(), kInf);
  for (std::size_t a = 0; a < pairs_.size(); ++a) {
    p.target_value[target_of_[a]] = std::min(p.target_value[target_of_[a]], -self_cost_[a]);
  }
  return relax_from(std::move(p));
}

CPathGraph::Paths CPathGraph::relax_from(Paths p) const {
  const std::size_t k = targets_.size();
  std::vector<std::size_t> parent(k, kNone);
  auto& v = p.target_value;
  auto relax = [&]() {
    std::size_t changed = kNone;
    for (std::size_t z = 0; z < k; ++z) {
      if (v[z] == kInf) continue;
      for (std::size_t t = 0; t < k; ++t) {
        const double cand = v[z] + step_[z * k + t];
        if (cand < v[t]) {
          v[t] = cand;
          parent[t] = z;
          changed = t;
        }
      }
    }
    return changed;
  };
  for (std::size_t round = 0; round < k; ++round) {
    if (relax() == kNone) return p;
  }
  std::size_t t = relax();
  if (t == kNone) return p;
  // Still improving after k rounds: walk back onto the cycle and weigh it.
  for (std::size_t s = 0; s < k && t != kNone; ++s) t = parent[t];
  if (t == kNone) return p;
  std::vector<std::size_t> nodes{t};
  for (std::size_t z = parent[t]; z != t; z = parent[z]) {
    if (z == kNone || nodes.size() > k) return p;
    nodes.push_back(z);
  }
  std::reverse(nodes.begin(), nodes.end());
  double weight = 0.0;
  std::vector<std::size_t> cycle;
  for (std::size_t s = 0; s < nodes.size(); ++s) {
    const std::size_t z = nodes[s], next = nodes[(s + 1) % nodes.size()];
    weight += step_[z * k + next];
    cycle.push_back(step_pair_[z * k + next]);
  }
  if (weight < -kNegativeCycleTolerance) throw NegativeCycleError(std::move(cycle), weight);
  return p;
}

std::vector<double> component_potential(const CPathGraph& gamma, std::size_t base) {
  const auto paths = gamma.from(base);
  std::vector<double> psi(paths.target_value.size());
  for (std::size_t t = 0; t < psi.size(); ++t) {
    psi[t] = paths.target_value[t] == kInf ? kNegInfinity : -paths.target_value[t];
  }
  return psi;
}

std::vector<std::vector<double>> connector_costs(const CPathGraph& gamma, const std::vector<std::size_t>& bases) {
  std::vector<std::vector<double>> c(bases.size(), std::vector<double>(bases.size(), 0.0));
  for (std::size_t i = 0; i < bases.size(); ++i) {
    const auto paths = gamma.from(bases[i]);
    for (std::size_t j = 0; j < bases.size(); ++j) {
      if (i != j) c[i][j] = paths.to_pair(gamma, bases[j]);
    }
  }
  return c;
}

std::vector<double> global_psi(const std::vector<std::vector<double>>& component_psi,
                               const std::vector<std::vector<double>>& connectors,
                               const std::vector<std::size_t>& label) {
  std::vector<double> psi(label.size(), kNegInfinity);
  for (std::size_t t = 0; t < label.size(); ++t) {
    const std::size_t j = label[t];
    const double inner = component_psi.at(j).at(t);
    if (inner == kNegInfinity) continue;
    for (std::size_t i = 0; i < connectors.size(); ++i) {
      if (connectors[i][j] == kInf) continue;
      psi[t] = std::max(psi[t], -connectors[i][j] + inner);
    }
  }
  return psi;
}

double psi_upper_bound(std::size_t vertex_count, double alpha) {
  return static_cast<double>(vertex_count) * -std::log(std::cos(std::numbers::pi / 2 - alpha / 8));
}

KantorovichPotential::KantorovichPotential(std::vector<UnitVector> atoms, std::vector<double> psi)
    : atoms_(std::move(atoms)), psi_(std::move(psi)) {
  if (atoms_.size() != psi_.size()) throw Error(ErrorCode::DimensionMismatch, "one value per atom required");
  if (std::all_of(psi_.begin(), psi_.end(), [](double v) { return v == kNegInfinity; })) {
    throw Error(ErrorCode::EmptyEffectiveDomain, "psi is -infinity everywhere");
  }
}

double KantorovichPotential::operator()(const UnitVector& n) const {
  const ExtendedReal v = c_transform(psi_, atoms_, n);
  if (v.is_infinite()) throw Error(ErrorCode::UnboundedPotential, "no atom of the effective domain within pi/2");
  return v.raw();
}

double KantorovichPotential::lipschitz_estimate(std::size_t samples, std::uint64_t seed) const {
  auto rng = block_engine(seed, 0);
  const std::size_t d = atoms_.front().ambient_dim();
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const UnitVector a = sample_uniform_sphere(d, rng);
    const UnitVector b = sample_uniform_cap(a, 1e-3, rng);
    const double dist = spherical_distance(a, b);
    if (dist < 1e-9) continue;
    const ExtendedReal fa = c_transform(psi_, atoms_, a), fb = c_transform(psi_, atoms_, b);
    if (fa.is_infinite() || fb.is_infinite()) continue;
    worst = std::max(worst, std::abs(fa.raw() - fb.raw()) / dist);
  }
  return worst;
}

KantorovichPotential potential_phi(const std::vector<double>& psi, const std::vector<UnitVector>& atoms) {
  return KantorovichPotential(atoms, psi);
}

SubdifferentialVerdict verify_subdifferential(const std::vector<std::pair<UnitVector, UnitVector>>& gamma,
                                              const KantorovichPotential& phi,
                                              const std::function<double(const UnitVector&)>& phi_c,
                                              const std::vector<UnitVector>& candidates, std::size_t directions,
                                              std::uint64_t seed) {
  SubdifferentialVerdict v;
  for (const auto& [n, x] : gamma) {
    const double gap = std::abs(phi(n) + phi_c(x) - cost_value(n, x));
    v.worst_gamma_gap = std::max(v.worst_gamma_gap, std::isnan(gap) ? kInf : gap);
  }
  std::vector<double> cand_values;
  for (const auto& x : candidates) cand_values.push_back(phi_c(x));
  auto rng = block_engine(seed, 1);
  const std::size_t d = phi.atoms().front().ambient_dim();
  v.worst_constraint = -kInf;
  for (std::size_t s = 0; s < directions; ++s) {
    const UnitVector n = sample_uniform_sphere(d, rng);
    const ExtendedReal f = c_transform(phi.psi(), phi.atoms(), n);
    if (f.is_infinite()) continue;
    double cc = kInf;
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      const double c = cost_value(n, candidates[j]);
      if (!std::isfinite(c) || !std::isfinite(cand_values[j])) continue;
      v.worst_constraint = std::max(v.worst_constraint, f.raw() + cand_values[j] - c);
      cc = std::min(cc, c - cand_values[j]);
    }
    const UnitVector x = sample_uniform_sphere(d, rng);
    const double c = cost_value(n, x);
    const double fx = phi_c(x);
    if (std::isfinite(c) && std::isfinite(fx)) v.worst_constraint = std::max(v.worst_constraint, f.raw() + fx - c);
    v.worst_cc_error = std::max(v.worst_cc_error, std::abs(cc - f.raw()));
  }
  v.passed = v.worst_constraint <= 1e-9 && v.worst_gamma_gap <= 1e-7 && v.worst_cc_error <= 1e-9;
  return v;
}

}  // namespace gip
