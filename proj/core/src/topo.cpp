#include "ots/topo.hpp"

#include <algorithm>

namespace ots {

LineGraph::LineGraph(const Network& net) {
  const auto& lines = net.lines();
  ids_.reserve(lines.size());
  for (const Line& l : lines) {
    pos_.emplace(l.id, static_cast<int>(ids_.size()));
    ids_.push_back(l.id);
  }
  // Bucket lines by endpoint bus; any two lines in a bucket are adjacent.
  std::unordered_map<int, std::vector<int>> by_bus;
  for (size_t i = 0; i < lines.size(); ++i) {
    by_bus[lines[i].from_bus].push_back(static_cast<int>(i));
    by_bus[lines[i].to_bus].push_back(static_cast<int>(i));
  }
  std::vector<std::vector<int>> adj(lines.size());
  for (const auto& [bus, members] : by_bus) {
    for (size_t a = 0; a < members.size(); ++a)
      for (size_t b = a + 1; b < members.size(); ++b) {
        adj[members[a]].push_back(members[b]);
        adj[members[b]].push_back(members[a]);
      }
  }
  adjacent_.resize(lines.size());
  for (size_t i = 0; i < lines.size(); ++i) {
    std::vector<int>& out = adjacent_[i];
    for (int p : adj[i]) out.push_back(ids_[p]);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
}

int LineGraph::pos(int line_id) const {
  auto it = pos_.find(line_id);
  if (it == pos_.end())
    throw UnknownLineError("unknown line id " + std::to_string(line_id));
  return it->second;
}

const std::vector<int>& LineGraph::adjacent(int line_id) const {
  return adjacent_[pos(line_id)];
}

std::vector<int> LineGraph::neighborhood(int line_id, int k) const {
  const int start = pos(line_id);
  if (k < 0) throw ValidationError("neighborhood level k must be >= 0");
  std::vector<int> dist(ids_.size(), -1);
  dist[start] = 0;
  std::vector<int> frontier{start};
  std::vector<int> result;
  for (int depth = 1; depth <= k && !frontier.empty(); ++depth) {
    std::vector<int> next;
    for (int u : frontier) {
      for (int id : adjacent_[u]) {
        const int v = pos_.at(id);
        if (dist[v] < 0) {
          dist[v] = depth;
          next.push_back(v);
          result.push_back(ids_[v]);
        }
      }
    }
    frontier = std::move(next);
  }
  std::sort(result.begin(), result.end());
  return result;
}

int LineGraph::eccentricity(int line_id) const {
  const int start = pos(line_id);
  std::vector<int> dist(ids_.size(), -1);
  dist[start] = 0;
  std::vector<int> frontier{start};
  int depth = 0;
  size_t reached = 1;
  while (!frontier.empty()) {
    std::vector<int> next;
    for (int u : frontier)
      for (int id : adjacent_[u]) {
        const int v = pos_.at(id);
        if (dist[v] < 0) {
          dist[v] = depth + 1;
          next.push_back(v);
          ++reached;
        }
      }
    if (next.empty()) break;
    ++depth;
    frontier = std::move(next);
  }
  (void)reached;
  return depth;
}

LineGraph build_line_graph(const Network& net) { return LineGraph(net); }

const std::vector<int>& NeighborhoodCache::get(int line_id, int k) {
  auto [it, inserted] = memo_.try_emplace({line_id, k});
  if (inserted) it->second = graph_->neighborhood(line_id, k);
  return it->second;
}

}  // namespace ots
