#pragma once

#include <map>
#include <unordered_map>
#include <vector>

#include "ots/netmodel.hpp"

namespace ots {

/// Graph over lines: two lines are adjacent when they share an endpoint bus.
/// Adjacency is symmetric and irreflexive. Immutable; queries are pure.
class LineGraph {
 public:
  explicit LineGraph(const Network& net);

  int line_count() const { return static_cast<int>(ids_.size()); }
  bool contains(int line_id) const { return pos_.contains(line_id); }

  /// Line ids sharing a bus with `line_id`, ascending.
  const std::vector<int>& adjacent(int line_id) const;

  /// L^k: all lines at line-graph distance <= k from `line_id`, excluding
  /// the line itself; k = 0 yields the empty set. BFS ring expansion.
  std::vector<int> neighborhood(int line_id, int k) const;

  /// Smallest k at which the neighborhood saturates to all other lines.
  int eccentricity(int line_id) const;

 private:
  int pos(int line_id) const;

  std::vector<int> ids_;                    // by position
  std::unordered_map<int, int> pos_;        // line id -> position
  std::vector<std::vector<int>> adjacent_;  // by position, sorted ids
};

LineGraph build_line_graph(const Network& net);

/// Per-run memo for neighborhood queries, keyed by (line, k).
class NeighborhoodCache {
 public:
  explicit NeighborhoodCache(const LineGraph& graph) : graph_(&graph) {}
  const std::vector<int>& get(int line_id, int k);

 private:
  const LineGraph* graph_;
  std::map<std::pair<int, int>, std::vector<int>> memo_;
};

}  // namespace ots
