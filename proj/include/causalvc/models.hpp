#pragma once

// Causal models as predictors of statistical properties, plus the graph
// machinery they rely on (d-separation, Markov equivalence, CPDAG extension
// and Gaussian chain gluing).

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <set>
#include <vector>

#include "causalvc/graph.hpp"

namespace causalvc {

namespace detail {

inline void check_query_nodes(int n, const Query& q) {
  for (int v : q.members()) check_node(n, v);
}

inline void require_kind(const Query& q, QueryKind k) {
  if (q.kind() != k) {
    throw Error(Errc::UnsupportedQueryForModel,
                std::string("expected ") + std::string(query_kind_name(k)) + " query, got " +
                    std::string(query_kind_name(q.kind())));
  }
}

}  // namespace detail

/// True iff y1 and y2 are d-separated by the conditioning set of `q`.
/// Reachability with collider rules ("Bayes ball").
inline bool d_separated(const Dag& g, const Query& q) {
  detail::require_kind(q, QueryKind::CondIndep);
  detail::check_query_nodes(g.n(), q);
  const int n = g.n();
  std::vector<char> in_z(static_cast<std::size_t>(n), 0);
  for (int z : q.conditioning()) in_z[z] = 1;
  const auto cond = q.conditioning();
  const std::vector<char> anc_z = g.ancestral_closure(cond);

  // state: node * 2 + dir, dir 0 = arrived from a child (moving up),
  // dir 1 = arrived from a parent (moving down)
  std::vector<char> seen(static_cast<std::size_t>(2 * n), 0);
  std::deque<std::pair<int, int>> todo{{q.first(), 0}};
  const int target = q.second();
  while (!todo.empty()) {
    auto [v, dir] = todo.front();
    todo.pop_front();
    if (seen[2 * v + dir]) continue;
    seen[2 * v + dir] = 1;
    if (!in_z[v] && v == target) return false;
    if (dir == 0) {
      if (in_z[v]) continue;
      for (int p : g.parents(v)) todo.emplace_back(p, 0);
      for (int c : g.children(v)) todo.emplace_back(c, 1);
    } else {
      if (!in_z[v])
        for (int c : g.children(v)) todo.emplace_back(c, 1);
      if (anc_z[v])
        for (int p : g.parents(v)) todo.emplace_back(p, 0);
    }
  }
  return true;
}

/// Q_G for conditional independences under the faithfulness convention:
/// 1 = independence predicted, 0 = dependence predicted.
inline PropertyValue q_ci_dag(const Dag& g, const Query& q) { return Binary{d_separated(g, q) ? 1 : 0}; }

/// 1 iff there is a directed path source -> ... -> target.
inline PropertyValue q_dirpath(const Dag& g, const Query& q) {
  detail::require_kind(q, QueryKind::OrderedPair);
  detail::check_query_nodes(g.n(), q);
  return Binary{g.descendants(q.first())[q.second()] ? 1 : 0};
}

/// 1 iff source -> target is an edge of the polytree.
inline PropertyValue q_anm_polytree(const Polytree& g, const Query& q) {
  detail::require_kind(q, QueryKind::OrderedPair);
  detail::check_query_nodes(g.n(), q);
  return Binary{g.dag().has_edge(q.first(), q.second()) ? 1 : 0};
}

/// How "no two members have a common ancestor" is read for LiNGAM admissibility.
enum class CommonAncestorReading {
  /// A node outside the tuple with directed paths to two members that do not
  /// pass through other members (an unobserved confounder of the marginal).
  Confounder,
  /// Any node, tuple members included, that is a proper ancestor of two members.
  AnyAncestor,
};

/// 1 iff the tuple is causally sufficient in g and its order is consistent
/// with g.
inline PropertyValue q_lingam_admissible(const Dag& g, const Query& q,
                                         CommonAncestorReading reading = CommonAncestorReading::Confounder) {
  detail::require_kind(q, QueryKind::OrderedTuple);
  detail::check_query_nodes(g.n(), q);
  const int n = g.n();
  const auto tuple = q.members();
  std::vector<char> in_tuple(static_cast<std::size_t>(n), 0);
  for (int v : tuple) in_tuple[v] = 1;

  // order consistency: no later member is an ancestor of an earlier one
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    const auto desc = g.descendants(tuple[i]);
    for (std::size_t j = 0; j < i; ++j)
      if (desc[tuple[j]]) return Binary{0};
  }

  for (int z = 0; z < n; ++z) {
    int hits = 0;
    if (reading == CommonAncestorReading::AnyAncestor) {
      const auto desc = g.descendants(z);
      for (int v : tuple)
        if (v != z && desc[v]) ++hits;
    } else {
      if (in_tuple[z]) continue;
      // walk downwards from z, stopping at tuple members
      std::vector<char> seen(static_cast<std::size_t>(n), 0);
      std::vector<int> stack{z};
      seen[z] = 1;
      while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int c : g.children(v)) {
          if (seen[c]) continue;
          seen[c] = 1;
          if (in_tuple[c])
            ++hits;
          else
            stack.push_back(c);
        }
      }
    }
    if (hits >= 2) return Binary{0};
  }
  return Binary{1};
}

/// Correlation implied by a collider-free path: the product of the adjacent
/// correlations between the two endpoints. corr(j, j) is 1 by convention.
inline double path_corr_value(const PathModel& m, int a, int b) {
  int pa = m.position(a);
  int pb = m.position(b);
  if (pa > pb) std::swap(pa, pb);
  double prod = 1.0;
  for (int i = pa; i < pb; ++i) prod *= m.r()[i];
  return prod;
}

inline PropertyValue path_corr(const PathModel& m, const Query& q) {
  detail::require_kind(q, QueryKind::UnorderedPair);
  return Real{path_corr_value(m, q.first(), q.second())};
}

/// Cumulative sign products s along the path; sign(corr(i, j)) = s_i * s_j.
inline std::vector<int> path_node_signs(const PathModel& m) {
  std::vector<int> s(static_cast<std::size_t>(m.n()), 1);
  int acc = 1;
  s[m.order()[0]] = acc;
  for (int i = 1; i < m.n(); ++i) {
    acc *= m.r()[i - 1] > 0 ? 1 : -1;
    s[m.order()[i]] = acc;
  }
  return s;
}

inline PropertyValue path_sign(const PathModel& m, const Query& q) {
  detail::require_kind(q, QueryKind::UnorderedPair);
  const auto s = path_node_signs(m);
  return Sign{s[q.first()] * s[q.second()]};
}

// ---------------------------------------------------------------------------
// Markov equivalence

inline std::vector<Edge> skeleton(const Dag& g) {
  std::vector<Edge> out;
  for (auto [a, b] : g.edges()) out.emplace_back(std::min(a, b), std::max(a, b));
  std::sort(out.begin(), out.end());
  return out;
}

/// Unshielded colliders (a, c, b) with a < b, a -> c <- b and a, b non-adjacent.
inline std::vector<std::array<int, 3>> v_structures(const Dag& g) {
  std::vector<std::array<int, 3>> out;
  for (int c = 0; c < g.n(); ++c) {
    const auto& pa = g.parents(c);
    for (std::size_t i = 0; i < pa.size(); ++i)
      for (std::size_t j = i + 1; j < pa.size(); ++j)
        if (!g.adjacent(pa[i], pa[j])) out.push_back({pa[i], c, pa[j]});
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline bool markov_equivalent(const Dag& g1, const Dag& g2) {
  if (g1.n() != g2.n()) throw Error(Errc::SizeMismatch, "graphs have different node counts");
  return skeleton(g1) == skeleton(g2) && v_structures(g1) == v_structures(g2);
}

// ---------------------------------------------------------------------------
// Mutable partially directed graph used by PC orientation and CPDAG extension.

class MixedGraph {
 public:
  explicit MixedGraph(int n) : n_(n), dir_(static_cast<std::size_t>(n) * n, 0), und_(static_cast<std::size_t>(n) * n, 0) {}

  explicit MixedGraph(const Cpdag& c) : MixedGraph(c.n()) {
    for (auto [a, b] : c.directed()) set_directed(a, b);
    for (auto [a, b] : c.undirected()) set_undirected(a, b);
  }

  int n() const { return n_; }
  bool directed(int a, int b) const { return dir_[idx(a, b)] != 0; }
  bool undirected(int a, int b) const { return und_[idx(a, b)] != 0; }
  bool adjacent(int a, int b) const { return directed(a, b) || directed(b, a) || undirected(a, b); }

  void set_directed(int a, int b) {
    und_[idx(a, b)] = und_[idx(b, a)] = 0;
    dir_[idx(b, a)] = 0;
    dir_[idx(a, b)] = 1;
  }
  void set_undirected(int a, int b) {
    dir_[idx(a, b)] = dir_[idx(b, a)] = 0;
    und_[idx(a, b)] = und_[idx(b, a)] = 1;
  }
  void remove(int a, int b) { dir_[idx(a, b)] = dir_[idx(b, a)] = und_[idx(a, b)] = und_[idx(b, a)] = 0; }

  /// Directed path from `from` to `to` using directed edges only.
  bool directed_path(int from, int to) const {
    std::vector<char> seen(static_cast<std::size_t>(n_), 0);
    std::vector<int> stack{from};
    seen[from] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      if (v == to) return true;
      for (int w = 0; w < n_; ++w)
        if (directed(v, w) && !seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
    }
    return false;
  }

  /// Orients the undirected edge a - b as a -> b unless that closes a directed
  /// cycle. Returns whether the orientation was applied.
  bool orient(int a, int b) {
    if (!undirected(a, b) || directed_path(b, a)) return false;
    set_directed(a, b);
    return true;
  }

  Cpdag to_cpdag() const {
    std::vector<Edge> d, u;
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < n_; ++b) {
        if (directed(a, b)) d.emplace_back(a, b);
        if (a < b && undirected(a, b)) u.emplace_back(a, b);
      }
    return Cpdag(n_, d, u);
  }

  std::vector<Edge> directed_edges() const {
    std::vector<Edge> d;
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < n_; ++b)
        if (directed(a, b)) d.emplace_back(a, b);
    return d;
  }

 private:
  std::size_t idx(int a, int b) const { return static_cast<std::size_t>(a) * n_ + b; }

  int n_;
  std::vector<char> dir_;
  std::vector<char> und_;
};

/// Meek rules R1-R3 applied to a fixpoint. Orientations that would close a
/// directed cycle are skipped.
inline void apply_meek_rules(MixedGraph& g) {
  const int n = g.n();
  bool changed = true;
  while (changed) {
    changed = false;
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        if (!g.undirected(b, c)) continue;
        bool fire = false;
        // R1: a -> b - c, a and c non-adjacent
        for (int a = 0; a < n && !fire; ++a)
          if (g.directed(a, b) && !g.adjacent(a, c) && a != c) fire = true;
        // R2: b -> a -> c
        for (int a = 0; a < n && !fire; ++a)
          if (g.directed(b, a) && g.directed(a, c)) fire = true;
        // R3: b - a1 -> c, b - a2 -> c, a1 and a2 non-adjacent
        for (int a1 = 0; a1 < n && !fire; ++a1) {
          if (!g.undirected(b, a1) || !g.directed(a1, c)) continue;
          for (int a2 = a1 + 1; a2 < n && !fire; ++a2)
            if (g.undirected(b, a2) && g.directed(a2, c) && !g.adjacent(a1, a2)) fire = true;
        }
        if (fire && g.orient(b, c)) changed = true;
      }
  }
}

/// Draws a DAG from the class represented by `c`. Sinks are peeled off in
/// random order (Dor-Tarsi extension); when no admissible sink exists the
/// remaining undirected edges follow a random linear extension of the
/// remaining directed edges, which keeps the result acyclic.
inline Dag random_dag_from_cpdag(const Cpdag& c, std::uint64_t seed) {
  const int n = c.n();
  MixedGraph g(c);
  Rng rng = make_rng(seed);
  std::vector<char> alive(static_cast<std::size_t>(n), 1);
  std::vector<Edge> out;
  int remaining = n;

  auto neighbours = [&](int x) {
    std::vector<int> nb;
    for (int y = 0; y < n; ++y)
      if (alive[y] && y != x && g.adjacent(x, y)) nb.push_back(y);
    return nb;
  };

  while (remaining > 0) {
    std::vector<int> eligible;
    for (int x = 0; x < n; ++x) {
      if (!alive[x]) continue;
      bool sink = true;
      for (int y = 0; y < n && sink; ++y)
        if (alive[y] && g.directed(x, y)) sink = false;
      if (!sink) continue;
      const auto nb = neighbours(x);
      bool ok = true;
      for (int y : nb) {
        if (!g.undirected(x, y)) continue;
        for (int z : nb)
          if (z != y && !g.adjacent(y, z)) ok = false;
      }
      if (ok) eligible.push_back(x);
    }
    if (eligible.empty()) break;
    const int x = eligible[std::uniform_int_distribution<std::size_t>(0, eligible.size() - 1)(rng)];
    for (int y : neighbours(x)) {
      if (g.undirected(x, y)) g.set_directed(y, x);
    }
    alive[x] = 0;
    --remaining;
  }

  if (remaining > 0) {
    // random linear extension of the directed part among surviving nodes
    std::vector<int> indeg(static_cast<std::size_t>(n), 0);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (alive[a] && alive[b] && g.directed(a, b)) ++indeg[b];
    std::vector<int> rank(static_cast<std::size_t>(n), -1);
    std::vector<int> ready;
    for (int v = 0; v < n; ++v)
      if (alive[v] && indeg[v] == 0) ready.push_back(v);
    int next = 0;
    while (!ready.empty()) {
      std::size_t i = std::uniform_int_distribution<std::size_t>(0, ready.size() - 1)(rng);
      int v = ready[i];
      ready.erase(ready.begin() + static_cast<std::ptrdiff_t>(i));
      rank[v] = next++;
      for (int w = 0; w < n; ++w)
        if (alive[w] && g.directed(v, w) && --indeg[w] == 0) ready.push_back(w);
    }
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        if (alive[a] && alive[b] && g.undirected(a, b)) {
          if (rank[a] < rank[b])
            g.set_directed(a, b);
          else
            g.set_directed(b, a);
        }
  }
  return Dag(n, g.directed_edges());
}

// ---------------------------------------------------------------------------
// Gaussian chain gluing

namespace detail {

inline void check_psd_2x2(const Eigen::Matrix2d& m, const char* name) {
  if (std::abs(m(0, 1) - m(1, 0)) > 1e-9) throw Error(Errc::NonPsdInput, std::string(name) + " is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-9) throw Error(Errc::NonPsdInput, std::string(name) + " is not PSD");
}

}  // namespace detail

/// Joint covariance of (X, Y, Z) from the (X, Y) and (Y, Z) marginals under
/// X independent of Z given Y: cov(X, Z) = cov(X, Y) cov(Y, Z) / var(Y).
inline Eigen::Matrix3d glue_gaussian_chain(const Eigen::Matrix2d& cov_xy, const Eigen::Matrix2d& cov_yz) {
  detail::check_psd_2x2(cov_xy, "cov_xy");
  detail::check_psd_2x2(cov_yz, "cov_yz");
  if (std::abs(cov_xy(1, 1) - cov_yz(0, 0)) > 1e-9) {
    throw Error(Errc::MarginalMismatch,
                "var(Y) is " + std::to_string(cov_xy(1, 1)) + " in cov_xy but " + std::to_string(cov_yz(0, 0)) + " in cov_yz");
  }
  const double var_y = cov_xy(1, 1);
  if (var_y < 1e-12) throw Error(Errc::DegenerateInput, "var(Y) vanishes");
  Eigen::Matrix3d out;
  out.topLeftCorner<2, 2>() = cov_xy;
  out(1, 2) = cov_yz(0, 1);
  out(2, 1) = cov_yz(1, 0);
  out(2, 2) = cov_yz(1, 1);
  const double cov_xz = cov_xy(0, 1) * cov_yz(0, 1) / var_y;
  out(0, 2) = out(2, 0) = cov_xz;
  return out;
}

}  // namespace causalvc
