#pragma once

#include <cstdint>
#include <vector>

namespace gip {

constexpr std::size_t kUnmatched = static_cast<std::size_t>(-1);

struct Matching {
  std::vector<std::size_t> left_to_right;
  std::vector<std::size_t> right_to_left;
  std::size_t size = 0;
};

/// Maximum bipartite matching. `adjacency[u]` lists the right vertices of
/// left vertex u; neighbours are tried in the listed order.
Matching hopcroft_karp(std::size_t right_count, const std::vector<std::vector<std::size_t>>& adjacency);

/// Left vertices reachable from unmatched left vertices along alternating
/// paths. When the matching is maximum and not left-perfect, this set
/// violates Hall's condition: it is larger than its neighbourhood.
std::vector<std::size_t> hall_violator(const std::vector<std::vector<std::size_t>>& adjacency, const Matching& m);

/// Integer maximum flow (Dinic).
class MaxFlow {
 public:
  static constexpr std::int64_t kInfinite = INT64_MAX / 4;

  explicit MaxFlow(std::size_t nodes);
  /// Returns the arc id.
  std::size_t add_arc(std::size_t from, std::size_t to, std::int64_t capacity);
  std::int64_t run(std::size_t source, std::size_t sink);
  std::int64_t flow(std::size_t arc) const;
  /// Nodes reachable from the source in the final residual graph.
  std::vector<bool> source_side(std::size_t source) const;

 private:
  struct Arc {
    std::size_t to;
    std::int64_t cap;
    std::int64_t initial;
  };
  bool bfs(std::size_t s, std::size_t t);
  std::int64_t dfs(std::size_t u, std::size_t t, std::int64_t pushed);

  std::vector<Arc> arcs_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<int> level_;
  std::vector<std::size_t> next_;
};

}  // namespace gip
