#include "gip/matching.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace gip {

Matching hopcroft_karp(std::size_t right_count, const std::vector<std::vector<std::size_t>>& adjacency) {
  const std::size_t n = adjacency.size();
  Matching m;
  m.left_to_right.assign(n, kUnmatched);
  m.right_to_left.assign(right_count, kUnmatched);
  constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(n);
  std::vector<std::size_t> it(n);

  auto bfs = [&] {
    std::deque<std::size_t> q;
    bool found = false;
    for (std::size_t u = 0; u < n; ++u) {
      dist[u] = m.left_to_right[u] == kUnmatched ? 0 : kInf;
      if (dist[u] == 0) q.push_back(u);
    }
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop_front();
      for (std::size_t v : adjacency[u]) {
        const std::size_t w = m.right_to_left[v];
        if (w == kUnmatched) {
          found = true;
        } else if (dist[w] == kInf) {
          dist[w] = dist[u] + 1;
          q.push_back(w);
        }
      }
    }
    return found;
  };

  // Iterative DFS along the layered graph.
  auto augment = [&](std::size_t root) {
    std::vector<std::size_t> stack{root};
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      if (it[u] == adjacency[u].size()) {
        dist[u] = kInf;
        stack.pop_back();
        continue;
      }
      const std::size_t v = adjacency[u][it[u]];
      const std::size_t w = m.right_to_left[v];
      if (w == kUnmatched) {
        // Flip the alternating path recorded on the stack.
        for (std::size_t k = stack.size(); k-- > 0;) {
          const std::size_t a = stack[k];
          const std::size_t b = adjacency[a][it[a]];
          m.left_to_right[a] = b;
          m.right_to_left[b] = a;
        }
        return true;
      }
      if (dist[w] == dist[u] + 1) {
        stack.push_back(w);
      } else {
        ++it[u];
      }
    }
    return false;
  };

  while (bfs()) {
    std::fill(it.begin(), it.end(), 0);
    for (std::size_t u = 0; u < n; ++u) {
      if (m.left_to_right[u] == kUnmatched && augment(u)) ++m.size;
    }
  }
  return m;
}

std::vector<std::size_t> hall_violator(const std::vector<std::vector<std::size_t>>& adjacency, const Matching& m) {
  std::vector<bool> seen(adjacency.size(), false);
  std::deque<std::size_t> q;
  for (std::size_t u = 0; u < adjacency.size(); ++u) {
    if (m.left_to_right[u] == kUnmatched) {
      seen[u] = true;
      q.push_back(u);
    }
  }
  while (!q.empty()) {
    const std::size_t u = q.front();
    q.pop_front();
    for (std::size_t v : adjacency[u]) {
      const std::size_t w = m.right_to_left[v];
      if (w != kUnmatched && !seen[w]) {
        seen[w] = true;
        q.push_back(w);
      }
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t u = 0; u < seen.size(); ++u) {
    if (seen[u]) out.push_back(u);
  }
  return out;
}

MaxFlow::MaxFlow(std::size_t nodes) : out_(nodes), level_(nodes), next_(nodes) {}

std::size_t MaxFlow::add_arc(std::size_t from, std::size_t to, std::int64_t capacity) {
  const std::size_t id = arcs_.size();
  arcs_.push_back({to, capacity, capacity});
  arcs_.push_back({from, 0, 0});
  out_[from].push_back(id);
  out_[to].push_back(id + 1);
  return id;
}

bool MaxFlow::bfs(std::size_t s, std::size_t t) {
  std::fill(level_.begin(), level_.end(), -1);
  std::deque<std::size_t> q{s};
  level_[s] = 0;
  while (!q.empty()) {
    const std::size_t u = q.front();
    q.pop_front();
    for (std::size_t a : out_[u]) {
      if (arcs_[a].cap > 0 && level_[arcs_[a].to] < 0) {
        level_[arcs_[a].to] = level_[u] + 1;
        q.push_back(arcs_[a].to);
      }
    }
  }
  return level_[t] >= 0;
}

std::int64_t MaxFlow::dfs(std::size_t u, std::size_t t, std::int64_t pushed) {
  if (u == t) return pushed;
  for (; next_[u] < out_[u].size(); ++next_[u]) {
    const std::size_t a = out_[u][next_[u]];
    const std::size_t v = arcs_[a].to;
    if (arcs_[a].cap <= 0 || level_[v] != level_[u] + 1) continue;
    const std::int64_t got = dfs(v, t, std::min(pushed, arcs_[a].cap));
    if (got > 0) {
      arcs_[a].cap -= got;
      arcs_[a ^ 1].cap += got;
      return got;
    }
  }
  return 0;
}

std::int64_t MaxFlow::run(std::size_t source, std::size_t sink) {
  std::int64_t total = 0;
  while (bfs(source, sink)) {
    std::fill(next_.begin(), next_.end(), 0);
    while (const std::int64_t f = dfs(source, sink, kInfinite)) total += f;
  }
  return total;
}

std::int64_t MaxFlow::flow(std::size_t arc) const { return arcs_[arc].initial - arcs_[arc].cap; }

std::vector<bool> MaxFlow::source_side(std::size_t source) const {
  std::vector<bool> seen(out_.size(), false);
  std::deque<std::size_t> q{source};
  seen[source] = true;
  while (!q.empty()) {
    const std::size_t u = q.front();
    q.pop_front();
    for (std::size_t a : out_[u]) {
      if (arcs_[a].cap > 0 && !seen[arcs_[a].to]) {
        seen[arcs_[a].to] = true;
        q.push_back(arcs_[a].to);
      }
    }
  }
  return seen;
}

}  // namespace gip
