#pragma once

// Graph model classes: DAGs, polytrees, CPDAGs and collider-free path models.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "causalvc/core.hpp"

namespace causalvc {

using Edge = std::pair<int, int>;

namespace detail {

inline void check_node(int n, int v) {
  if (v < 0 || v >= n) throw Error(Errc::UnknownNode, "node " + std::to_string(v) + " outside 0.." + std::to_string(n - 1));
}

// Union-find over node indices; used for forest checks.
class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(static_cast<std::size_t>(n)) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int v) {
    while (parent_[v] != v) v = parent_[v] = parent_[parent_[v]];
    return v;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<int> parent_;
};

}  // namespace detail

/// Directed acyclic graph over nodes {0..n-1}.
class Dag {
 public:
  Dag() = default;
  explicit Dag(int n) : n_(n), adj_(static_cast<std::size_t>(n) * n, 0), parents_(n), children_(n) {
    if (n < 0) throw Error(Errc::InvalidN, "negative node count");
  }
  Dag(int n, const std::vector<Edge>& edges) : Dag(n) {
    for (auto [a, b] : edges) insert(a, b);
    if (!topological_order_impl()) throw Error(Errc::InvalidModel, "graph contains a directed cycle");
  }

  int n() const { return n_; }
  bool has_edge(int a, int b) const { return adj_[index(a, b)] != 0; }
  bool adjacent(int a, int b) const { return has_edge(a, b) || has_edge(b, a); }
  const std::vector<int>& parents(int v) const { return parents_[v]; }
  const std::vector<int>& children(int v) const { return children_[v]; }

  std::size_t edge_count() const {
    std::size_t m = 0;
    for (const auto& c : children_) m += c.size();
    return m;
  }

  /// Edges in lexicographic order.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < n_; ++b)
        if (has_edge(a, b)) out.emplace_back(a, b);
    return out;
  }

  std::vector<int> topological_order() const { return *topological_order_impl(); }

  /// Nodes with a directed path to any node of `targets`, including the targets.
  std::vector<char> ancestral_closure(std::span<const int> targets) const {
    std::vector<char> mark(static_cast<std::size_t>(n_), 0);
    std::vector<int> stack;
    for (int t : targets) {
      detail::check_node(n_, t);
      if (!mark[t]) {
        mark[t] = 1;
        stack.push_back(t);
      }
    }
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int p : parents_[v])
        if (!mark[p]) {
          mark[p] = 1;
          stack.push_back(p);
        }
    }
    return mark;
  }

  /// Nodes reachable from `source` along directed edges, excluding source itself
  /// unless it lies on a cycle (which a Dag never has).
  std::vector<char> descendants(int source) const {
    detail::check_node(n_, source);
    std::vector<char> mark(static_cast<std::size_t>(n_), 0);
    std::vector<int> stack(children_[source].begin(), children_[source].end());
    for (int c : stack) mark[c] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int c : children_[v])
        if (!mark[c]) {
          mark[c] = 1;
          stack.push_back(c);
        }
    }
    return mark;
  }

  bool is_proper_ancestor(int a, int b) const { return descendants(a)[b] != 0; }

  bool skeleton_is_forest() const {
    detail::DisjointSets ds(n_);
    for (auto [a, b] : edges())
      if (!ds.unite(a, b)) return false;
    return true;
  }

  bool operator==(const Dag& o) const { return n_ == o.n_ && adj_ == o.adj_; }

 private:
  std::size_t index(int a, int b) const {
    detail::check_node(n_, a);
    detail::check_node(n_, b);
    return static_cast<std::size_t>(a) * n_ + b;
  }

  void insert(int a, int b) {
    if (a == b) throw Error(Errc::InvalidModel, "self-loop at node " + std::to_string(a));
    auto& cell = adj_[index(a, b)];
    if (cell) throw Error(Errc::InvalidModel, "duplicate edge " + std::to_string(a) + "->" + std::to_string(b));
    cell = 1;
    children_[a].push_back(b);
    parents_[b].push_back(a);
    std::sort(children_[a].begin(), children_[a].end());
    std::sort(parents_[b].begin(), parents_[b].end());
  }

  // Kahn's algorithm with smallest-index tie-breaking.
  std::optional<std::vector<int>> topological_order_impl() const {
    std::vector<int> indeg(static_cast<std::size_t>(n_));
    for (int v = 0; v < n_; ++v) indeg[v] = static_cast<int>(parents_[v].size());
    std::priority_queue<int, std::vector<int>, std::greater<>> ready;
    for (int v = 0; v < n_; ++v)
      if (indeg[v] == 0) ready.push(v);
    std::vector<int> order;
    while (!ready.empty()) {
      int v = ready.top();
      ready.pop();
      order.push_back(v);
      for (int c : children_[v])
        if (--indeg[c] == 0) ready.push(c);
    }
    if (static_cast<int>(order.size()) != n_) return std::nullopt;
    return order;
  }

  int n_ = 0;
  std::vector<char> adj_;
  std::vector<std::vector<int>> parents_;
  std::vector<std::vector<int>> children_;
};

inline bool is_polytree(const Dag& g) { return g.skeleton_is_forest(); }

/// DAG whose undirected skeleton is a forest.
class Polytree {
 public:
  Polytree() = default;
  explicit Polytree(Dag g) : dag_(std::move(g)) {
    if (!dag_.skeleton_is_forest()) throw Error(Errc::InvalidModel, "skeleton contains an undirected cycle");
  }
  Polytree(int n, const std::vector<Edge>& edges) : Polytree(Dag(n, edges)) {}

  const Dag& dag() const { return dag_; }
  int n() const { return dag_.n(); }

 private:
  Dag dag_;
};

/// Partially directed graph as returned by the PC algorithm.
class Cpdag {
 public:
  Cpdag() = default;
  Cpdag(int n, std::vector<Edge> directed, std::vector<Edge> undirected) : n_(n) {
    if (n < 0) throw Error(Errc::InvalidN, "negative node count");
    for (auto& e : undirected)
      if (e.first > e.second) std::swap(e.first, e.second);
    std::sort(directed.begin(), directed.end());
    std::sort(undirected.begin(), undirected.end());
    std::vector<Edge> all;
    for (auto [a, b] : directed) {
      detail::check_node(n, a);
      detail::check_node(n, b);
      if (a == b) throw Error(Errc::InvalidModel, "self-loop");
      all.emplace_back(std::min(a, b), std::max(a, b));
    }
    for (auto [a, b] : undirected) {
      detail::check_node(n, a);
      detail::check_node(n, b);
      if (a == b) throw Error(Errc::InvalidModel, "self-loop");
      all.emplace_back(a, b);
    }
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
      throw Error(Errc::InvalidModel, "node pair listed more than once");
    }
    Dag check(n, directed);  // throws on a directed cycle
    directed_ = std::move(directed);
    undirected_ = std::move(undirected);
  }

  int n() const { return n_; }
  const std::vector<Edge>& directed() const { return directed_; }
  const std::vector<Edge>& undirected() const { return undirected_; }

  bool operator==(const Cpdag&) const = default;

 private:
  int n_ = 0;
  std::vector<Edge> directed_;
  std::vector<Edge> undirected_;
};

/// A single collider-free path X_order[0] - X_order[1] - ... with the
/// correlation r[i] between order[i] and order[i+1].
class PathModel {
 public:
  PathModel() = default;
  PathModel(std::vector<int> order, std::vector<double> r) : order_(std::move(order)), r_(std::move(r)) {
    const int n = static_cast<int>(order_.size());
    if (n < 2) throw Error(Errc::InvalidModel, "path needs at least two nodes");
    if (r_.size() != order_.size() - 1) throw Error(Errc::InvalidModel, "need n-1 adjacent correlations");
    position_.assign(static_cast<std::size_t>(n), -1);
    for (int i = 0; i < n; ++i) {
      detail::check_node(n, order_[i]);
      if (position_[order_[i]] != -1) throw Error(Errc::InvalidModel, "order is not a permutation");
      position_[order_[i]] = i;
    }
    for (double v : r_)
      if (!(std::abs(v) < 1.0) || v == 0.0) throw Error(Errc::InvalidModel, "adjacent correlations must lie in (-1,0)u(0,1)");
  }

  int n() const { return static_cast<int>(order_.size()); }
  const std::vector<int>& order() const { return order_; }
  const std::vector<double>& r() const { return r_; }
  int position(int node) const {
    detail::check_node(n(), node);
    return position_[node];
  }

  /// Forward chain order[0] -> order[1] -> ...; every collider-free
  /// orientation of the path is Markov equivalent to it.
  Dag chain_dag() const {
    std::vector<Edge> e;
    for (std::size_t i = 0; i + 1 < order_.size(); ++i) e.emplace_back(order_[i], order_[i + 1]);
    return Dag(n(), e);
  }

 private:
  std::vector<int> order_;
  std::vector<double> r_;
  std::vector<int> position_;
};

}  // namespace causalvc
