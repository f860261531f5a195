// Network simplex for the transportation problem on finite-cost pairs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <random>

#include "gip/transport.hpp"

namespace gip {

namespace {

constexpr double kPriceTolerance = 1e-11;
constexpr std::size_t kNone = static_cast<std::size_t>(-1);

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

// Arcs grouped by source: arcs of source i are [first[i], first[i + 1]).
struct ArcLists {
  std::vector<std::size_t> first;
  std::vector<std::size_t> target;
  std::vector<double> cost;
};

// Feasible start from a rough dual: coordinate ascent on the target
// potentials of the semi-discrete dual, then each source poured into its
// cheapest targets with room left, hardest choices first. Returns an empty
// vector when the pouring gets stuck on a source without finite room.
std::vector<TransportPlan::Entry> greedy_start(const ArcLists& arcs, const std::vector<std::int64_t>& supply,
                                               const std::vector<std::int64_t>& demand) {
  const std::size_t l = supply.size(), p = demand.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<std::size_t>> into(p);
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t a = arcs.first[i]; a < arcs.first[i + 1]; ++a) into[arcs.target[a]].push_back(a);
  }
  std::vector<std::size_t> owner(arcs.target.size());
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t a = arcs.first[i]; a < arcs.first[i + 1]; ++a) owner[a] = i;
  }
  std::vector<double> psi(p, 0.0);
  std::size_t work = 0;
  constexpr std::size_t kWorkBudget = 200'000'000;
  std::vector<std::pair<double, std::int64_t>> thresholds;
  for (int sweep = 0; sweep < 40 && work < kWorkBudget; ++sweep) {
    for (std::size_t j = 0; j < p; ++j) {
      // Source i joins j once psi_j exceeds c_ij minus its best other option.
      thresholds.clear();
      for (std::size_t a : into[j]) {
        const std::size_t i = owner[a];
        double other = kInf;
        for (std::size_t b = arcs.first[i]; b < arcs.first[i + 1]; ++b) {
          if (b != a) other = std::min(other, arcs.cost[b] - psi[arcs.target[b]]);
        }
        work += arcs.first[i + 1] - arcs.first[i];
        thresholds.emplace_back(arcs.cost[a] - other, supply[i]);
      }
      std::sort(thresholds.begin(), thresholds.end());
      std::int64_t filled = 0;
      for (const auto& [t, units] : thresholds) {
        filled += units;
        if (filled >= demand[j]) {
          if (std::isfinite(t)) psi[j] = t;
          break;
        }
      }
    }
  }
  std::vector<double> regret(l, kInf);
  for (std::size_t i = 0; i < l; ++i) {
    double best = kInf, second = kInf;
    for (std::size_t a = arcs.first[i]; a < arcs.first[i + 1]; ++a) {
      const double r = arcs.cost[a] - psi[arcs.target[a]];
      if (r < best) {
        second = best;
        best = r;
      } else if (r < second) {
        second = r;
      }
    }
    regret[i] = second - best;
  }
  std::vector<std::size_t> order(l);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return regret[a] > regret[b]; });
  std::vector<std::int64_t> room = demand;
  std::vector<TransportPlan::Entry> out;
  std::vector<std::size_t> prefs;
  for (std::size_t i : order) {
    prefs.clear();
    for (std::size_t a = arcs.first[i]; a < arcs.first[i + 1]; ++a) prefs.push_back(a);
    std::sort(prefs.begin(), prefs.end(), [&](std::size_t a, std::size_t b) {
      return arcs.cost[a] - psi[arcs.target[a]] < arcs.cost[b] - psi[arcs.target[b]];
    });
    std::int64_t left = supply[i];
    for (std::size_t a : prefs) {
      if (left == 0) break;
      const std::size_t j = arcs.target[a];
      const std::int64_t take = std::min(left, room[j]);
      if (take == 0) continue;
      out.push_back({i, j, take});
      room[j] -= take;
      left -= take;
    }
    if (left > 0) return {};
  }
  return out;
}

class NetworkSimplex {
 public:
  NetworkSimplex(const AtomicMeasure& lambda_d, const AtomicMeasure& mu_d, const TransportPlan& initial,
                 const SimplexOptions& options)
      : l_(lambda_d.size()), p_(mu_d.size()), options_(options) {
    const std::size_t n = l_ + p_;
    std::vector<std::size_t> index_of(l_ * p_, kNone);
    for (std::size_t i = 0; i < l_; ++i) {
      for (std::size_t j = 0; j < p_; ++j) {
        const double c = cost_value(lambda_d.atom(i), mu_d.atom(j));
        if (!std::isfinite(c)) continue;
        from_.push_back(i);
        to_.push_back(l_ + j);
        cost_.push_back(c);
      }
    }
    const std::size_t m = cost_.size();
    std::vector<TransportPlan::Entry> start;
    if (options.warm_start) {
      ArcLists arcs;
      arcs.first.assign(l_ + 1, 0);
      for (std::size_t k = 0; k < m; ++k) ++arcs.first[from_[k] + 1];
      for (std::size_t i = 0; i < l_; ++i) arcs.first[i + 1] += arcs.first[i];
      for (std::size_t k = 0; k < m; ++k) {
        arcs.target.push_back(to_[k] - l_);
        arcs.cost.push_back(cost_[k]);
      }
      start = greedy_start(arcs, initial.source_units, initial.target_units);
    }
    if (start.empty()) start = initial.entries;
    // Pricing order: arc positions shuffled by the pivot seed.
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    if (options.pivot_seed != 0) {
      std::mt19937_64 rng(options.pivot_seed);
      std::shuffle(order.begin(), order.end(), rng);
    }
    permute(order);
    for (std::size_t k = 0; k < m; ++k) index_of[from_[k] * p_ + (to_[k] - l_)] = k;
    flow_.assign(m, 0);
    for (const auto& e : start) {
      const std::size_t k = index_of[e.i * p_ + e.j];
      if (k == kNone) throw Error(ErrorCode::InvalidArgument, "initial plan uses an infinite-cost pair");
      flow_[k] += e.units;
    }
    in_tree_.assign(m, 0);
    slot_.assign(2 * m, kNone);
    adjacent_.assign(n, {});
    parent_arc_.assign(n, kNone);
    depth_.assign(n, 0);
    pot_.assign(n, 0.0);
    build_initial_tree();
  }

  void run(SimplexStats* stats) {
    const std::size_t m = cost_.size();
    const std::size_t block = std::max<std::size_t>(64, static_cast<std::size_t>(std::sqrt(static_cast<double>(m))));
    std::size_t cursor = 0;
    std::size_t degenerate_streak = 0;
    const std::size_t bland_after = std::max<std::size_t>(64, l_ + p_);
    for (;;) {
      std::size_t entering = kNone;
      if (degenerate_streak > bland_after) {
        // Bland's rule: first eligible arc in pricing order.
        for (std::size_t k = 0; k < m && entering == kNone; ++k) {
          if (!in_tree_[k] && reduced_cost(k) < -kPriceTolerance) entering = k;
        }
      } else {
        // Block search: most negative reduced cost within the next block.
        double best = -kPriceTolerance;
        for (std::size_t scanned = 0; scanned < m;) {
          const std::size_t stop = std::min(m, scanned + block);
          for (; scanned < stop; ++scanned) {
            const std::size_t k = cursor;
            cursor = cursor + 1 == m ? 0 : cursor + 1;
            if (in_tree_[k]) continue;
            const double rc = reduced_cost(k);
            if (rc < best) {
              best = rc;
              entering = k;
            }
          }
          if (entering != kNone) break;
        }
      }
      if (entering == kNone) break;
      if (pivots_ >= options_.max_pivots) throw Error(ErrorCode::InvalidArgument, "pivot limit reached");
      const bool degenerate = pivot(entering);
      ++pivots_;
      if (degenerate) {
        ++degenerate_pivots_;
        ++degenerate_streak;
      } else {
        degenerate_streak = 0;
      }
    }
    recompute_potentials();
    if (stats) {
      stats->pivots = pivots_;
      stats->degenerate_pivots = degenerate_pivots_;
      stats->components = components_;
    }
  }

  TransportPlan plan(const TransportPlan& initial) const {
    TransportPlan out = initial;
    out.entries.clear();
    for (std::size_t k = 0; k < flow_.size(); ++k) {
      if (flow_[k] > 0) out.entries.push_back({from_[k], to_[k] - l_, flow_[k]});
    }
    out.normalize();
    return out;
  }

  DualSolution dual() const {
    DualSolution d;
    d.phi.assign(pot_.begin(), pot_.begin() + static_cast<std::ptrdiff_t>(l_));
    d.psi.assign(pot_.begin() + static_cast<std::ptrdiff_t>(l_), pot_.end());
    return d;
  }

 private:
  void permute(const std::vector<std::size_t>& order) {
    std::vector<std::size_t> f, t;
    std::vector<double> c;
    for (std::size_t k : order) {
      f.push_back(from_[k]);
      t.push_back(to_[k]);
      c.push_back(cost_[k]);
    }
    from_ = std::move(f);
    to_ = std::move(t);
    cost_ = std::move(c);
  }

  double reduced_cost(std::size_t k) const { return cost_[k] - pot_[from_[k]] - pot_[to_[k]]; }

  std::size_t other(std::size_t k, std::size_t v) const { return from_[k] == v ? to_[k] : from_[k]; }

  void link(std::size_t k) {
    in_tree_[k] = 1;
    slot_[2 * k] = adjacent_[from_[k]].size();
    adjacent_[from_[k]].push_back(k);
    slot_[2 * k + 1] = adjacent_[to_[k]].size();
    adjacent_[to_[k]].push_back(k);
  }

  // Swap-removal, keeping the slot of the moved arc current.
  void unlink(std::size_t k) {
    in_tree_[k] = 0;
    for (int end = 0; end < 2; ++end) {
      const std::size_t v = end == 0 ? from_[k] : to_[k];
      auto& a = adjacent_[v];
      const std::size_t at = slot_[2 * k + end];
      const std::size_t moved = a.back();
      a[at] = moved;
      slot_[2 * moved + (from_[moved] == v ? 0 : 1)] = at;
      a.pop_back();
    }
  }

  // Tree path from u to v as arc ids, found by BFS in the current forest.
  std::vector<std::size_t> forest_path(std::size_t u, std::size_t v) const {
    std::vector<std::size_t> via(adjacent_.size(), kNone);
    std::vector<char> seen(adjacent_.size(), 0);
    std::deque<std::size_t> q{u};
    seen[u] = 1;
    while (!q.empty() && !seen[v]) {
      const std::size_t x = q.front();
      q.pop_front();
      for (std::size_t k : adjacent_[x]) {
        const std::size_t y = other(k, x);
        if (!seen[y]) {
          seen[y] = 1;
          via[y] = k;
          q.push_back(y);
        }
      }
    }
    std::vector<std::size_t> path;
    for (std::size_t x = v; x != u; x = other(via[x], x)) path.push_back(via[x]);
    std::reverse(path.begin(), path.end());
    return path;
  }

  // Support arcs of the initial plan, with cycles cancelled in the direction
  // that does not increase cost, then zero-flow arcs joining the pieces.
  void build_initial_tree() {
    const std::size_t n = l_ + p_;
    UnionFind uf(n);
    std::vector<std::size_t> support;
    for (std::size_t k = 0; k < flow_.size(); ++k) {
      if (flow_[k] > 0) support.push_back(k);
    }
    std::sort(support.begin(), support.end());
    for (std::size_t e : support) {
      if (uf.unite(from_[e], to_[e])) {
        link(e);
        continue;
      }
      // Cycle: e from source to sink, then the tree path back to the source.
      const auto path = forest_path(to_[e], from_[e]);
      std::vector<std::pair<std::size_t, int>> cycle{{e, +1}};
      std::size_t at = to_[e];
      for (std::size_t k : path) {
        cycle.emplace_back(k, from_[k] == at ? +1 : -1);
        at = other(k, at);
      }
      double delta = 0.0;
      for (const auto& [k, s] : cycle) delta += s * cost_[k];
      const int dir = delta <= 0.0 ? 1 : -1;
      std::int64_t theta = INT64_MAX;
      std::size_t leave = kNone;
      for (const auto& [k, s] : cycle) {
        if (s * dir < 0 && (flow_[k] < theta || (flow_[k] == theta && k < leave))) {
          theta = flow_[k];
          leave = k;
        }
      }
      for (const auto& [k, s] : cycle) flow_[k] += s * dir * theta;
      if (leave != e) {
        unlink(leave);
        link(e);
      }
    }
    for (std::size_t k = 0; k < flow_.size(); ++k) {
      if (!in_tree_[k] && uf.unite(from_[k], to_[k])) link(k);
    }
    recompute_potentials();
  }

  // Roots each component at its lowest source with potential 0.
  void recompute_potentials() {
    const std::size_t n = l_ + p_;
    std::vector<char> seen(n, 0);
    components_ = 0;
    for (std::size_t r = 0; r < n; ++r) {
      if (seen[r]) continue;
      ++components_;
      seen[r] = 1;
      parent_arc_[r] = kNone;
      depth_[r] = 0;
      pot_[r] = 0.0;
      std::deque<std::size_t> q{r};
      while (!q.empty()) {
        const std::size_t x = q.front();
        q.pop_front();
        for (std::size_t k : adjacent_[x]) {
          const std::size_t y = other(k, x);
          if (seen[y]) continue;
          seen[y] = 1;
          parent_arc_[y] = k;
          depth_[y] = depth_[x] + 1;
          pot_[y] = cost_[k] - pot_[x];
          q.push_back(y);
        }
      }
    }
  }

  // Returns true for a degenerate pivot.
  bool pivot(std::size_t e) {
    const std::size_t u = from_[e], v = to_[e];
    // Walk both endpoints up to their common ancestor. The cycle pushes flow
    // along e from u to v, then from v back to u through the tree.
    std::vector<std::size_t> up_u, up_v;
    std::size_t a = u, b = v;
    while (a != b) {
      if (depth_[a] >= depth_[b]) {
        up_u.push_back(parent_arc_[a]);
        a = other(parent_arc_[a], a);
      } else {
        up_v.push_back(parent_arc_[b]);
        b = other(parent_arc_[b], b);
      }
    }
    // Orientation along v -> lca -> u: arcs on v's side are walked upward,
    // arcs on u's side downward.
    std::int64_t theta = INT64_MAX;
    std::size_t leave = kNone;
    auto consider = [&](std::size_t k, std::size_t walked_from) {
      const bool forward = from_[k] == walked_from;
      if (forward) return;
      if (flow_[k] < theta || (flow_[k] == theta && k < leave)) {
        theta = flow_[k];
        leave = k;
      }
    };
    std::size_t x = v;
    for (std::size_t k : up_v) {
      consider(k, x);
      x = other(k, x);
    }
    std::vector<std::size_t> nodes_u{u};
    for (std::size_t k : up_u) nodes_u.push_back(other(k, nodes_u.back()));
    for (std::size_t idx = 0; idx < up_u.size(); ++idx) {
      // Arc up_u[idx] joins nodes_u[idx] (child) and nodes_u[idx + 1] (parent);
      // the cycle walks it from the parent down to the child.
      consider(up_u[idx], nodes_u[idx + 1]);
    }
    if (leave == kNone) throw Error(ErrorCode::InvalidArgument, "unbounded pivot");
    // Apply theta.
    flow_[e] += theta;
    {
      x = v;
      for (std::size_t k : up_v) {
        flow_[k] += from_[k] == x ? theta : -theta;
        x = other(k, x);
      }
      for (std::size_t idx = 0; idx < up_u.size(); ++idx) {
        const std::size_t k = up_u[idx];
        flow_[k] += from_[k] == nodes_u[idx + 1] ? theta : -theta;
      }
    }
    // Of the two trees left by the leaving arc, re-hang the smaller one
    // below the entering arc. Potentials stay valid up to the usual gauge.
    const std::size_t a_end = from_[leave], b_end = to_[leave];
    unlink(leave);
    const bool a_smaller = smaller_side(a_end, b_end);
    const std::size_t small_end = a_smaller ? a_end : b_end;
    const std::size_t large_end = a_smaller ? b_end : a_end;
    if (parent_arc_[large_end] == leave) parent_arc_[large_end] = kNone;
    const bool u_small = on_side(u, small_end);
    link(e);
    rehang(u_small ? u : v, u_small ? v : u, e);
    return theta == 0;
  }

  // True when the tree holding a is no larger than the one holding b. Both
  // are explored in lockstep so the cost is bounded by the smaller tree.
  bool smaller_side(std::size_t a, std::size_t b) {
    ++stamp_;
    if (mark_.size() != adjacent_.size()) mark_.assign(adjacent_.size(), 0);
    struct Walk {
      std::vector<std::size_t> stack;
      std::uint64_t tag;
    };
    Walk wa{{a}, 2 * stamp_}, wb{{b}, 2 * stamp_ + 1};
    mark_[a] = wa.tag;
    mark_[b] = wb.tag;
    auto step = [&](Walk& w) {
      if (w.stack.empty()) return false;
      const std::size_t x = w.stack.back();
      w.stack.pop_back();
      for (std::size_t k : adjacent_[x]) {
        const std::size_t y = other(k, x);
        if (mark_[y] != w.tag) {
          mark_[y] = w.tag;
          w.stack.push_back(y);
        }
      }
      return true;
    };
    for (;;) {
      if (!step(wa)) return true;
      if (!step(wb)) return false;
    }
  }

  // Whether x was reached by the completed walk from side.
  bool on_side(std::size_t x, std::size_t side) const { return mark_[x] == mark_[side]; }

  void rehang(std::size_t inner, std::size_t outer, std::size_t e) {
    parent_arc_[inner] = e;
    depth_[inner] = depth_[outer] + 1;
    pot_[inner] = cost_[e] - pot_[outer];
    std::vector<std::size_t> stack{inner};
    while (!stack.empty()) {
      const std::size_t x = stack.back();
      stack.pop_back();
      for (std::size_t k : adjacent_[x]) {
        if (k == parent_arc_[x]) continue;
        const std::size_t y = other(k, x);
        parent_arc_[y] = k;
        depth_[y] = depth_[x] + 1;
        pot_[y] = cost_[k] - pot_[x];
        stack.push_back(y);
      }
    }
  }

  std::size_t l_, p_;
  SimplexOptions options_;
  std::vector<std::size_t> from_, to_;
  std::vector<double> cost_;
  std::vector<std::int64_t> flow_;
  std::vector<char> in_tree_;
  std::vector<std::size_t> slot_;
  std::vector<std::vector<std::size_t>> adjacent_;
  std::vector<std::size_t> parent_arc_;
  std::vector<std::size_t> depth_;
  std::vector<double> pot_;
  std::vector<std::uint64_t> mark_;
  std::uint64_t stamp_ = 0;
  std::size_t pivots_ = 0;
  std::size_t degenerate_pivots_ = 0;
  std::size_t components_ = 0;
};

}  // namespace

std::pair<TransportPlan, DualSolution> optimal_plan(const AtomicMeasure& lambda_d, const AtomicMeasure& mu_d,
                                                    const TransportPlan& initial, const SimplexOptions& options,
                                                    SimplexStats* stats) {
  if (initial.source.size() != lambda_d.size() || initial.target.size() != mu_d.size()) {
    throw Error(ErrorCode::MarginalMismatch, "initial plan does not match the measures");
  }
  initial.check_marginals();
  NetworkSimplex ns(lambda_d, mu_d, initial, options);
  ns.run(stats);
  return {ns.plan(initial), ns.dual()};
}

}  // namespace gip
