#pragma once

// Learners that fit causal models to observed test outcomes: the PC algorithm
// read as empirical risk minimization over CI labels, polytree construction
// from bivariate ANM tests, and greedy collider-free path fitting.

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <vector>

#include "causalvc/models.hpp"
#include "causalvc/stattests.hpp"
#include "causalvc/synthgen.hpp"

namespace causalvc {

struct LabeledQuery {
  Query query;
  TestOutcome outcome;
};

namespace detail {

inline int dense_universe_size(const Dataset& d) {
  std::vector<VariableId> cols = d.columns();
  std::sort(cols.begin(), cols.end());
  for (std::size_t i = 0; i < cols.size(); ++i)
    if (cols[i] != static_cast<VariableId>(i)) {
      throw Error(Errc::MissingVariable, "dataset must cover variables 0..n-1; missing " + std::to_string(i));
    }
  return static_cast<int>(cols.size());
}

}  // namespace detail

struct PcResult {
  Cpdag cpdag;
  /// Every CI query executed, once each, in order of first execution.
  std::vector<LabeledQuery> training;
  /// v-structure orientations that contradicted an earlier one.
  int conflicts = 0;
};

/// PC algorithm with conditioning sets of size <= max_cond. Edges are visited
/// in lexicographic order; the first separating set found is recorded and
/// drives v-structure orientation, followed by Meek rules R1-R3.
inline PcResult pc_fit(int n, const Tester& test, int max_cond) {
  if (n < 2) throw Error(Errc::InvalidN, "n must be >= 2");
  if (max_cond < 0) throw Error(Errc::InvalidParams, "max_cond must be >= 0");
  std::vector<char> adj(static_cast<std::size_t>(n) * n, 1);
  for (int i = 0; i < n; ++i) adj[static_cast<std::size_t>(i) * n + i] = 0;
  auto adjacent = [&](int a, int b) { return adj[static_cast<std::size_t>(a) * n + b] != 0; };
  std::map<Edge, std::vector<int>> sepset;
  std::map<Query, std::size_t> seen;
  PcResult result;

  auto run = [&](const Query& q) -> const TestOutcome& {
    auto it = seen.find(q);
    if (it != seen.end()) return result.training[it->second].outcome;
    result.training.push_back({q, test(q)});
    seen.emplace(q, result.training.size() - 1);
    return result.training.back().outcome;
  };

  for (int level = 0; level <= max_cond; ++level) {
    bool any = false;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j || !adjacent(i, j)) continue;
        std::vector<int> pool;
        for (int v = 0; v < n; ++v)
          if (v != i && v != j && adjacent(i, v)) pool.push_back(v);
        if (static_cast<int>(pool.size()) < level) continue;
        any = true;
        bool removed = false;
        detail::for_each_subset(pool, static_cast<std::size_t>(level), [&](const std::vector<int>& s) {
          if (removed) return;
          const TestOutcome& o = run(Query::cond_indep(i, j, s));
          if (std::get<Binary>(o.value).value == 1) {
            adj[static_cast<std::size_t>(i) * n + j] = adj[static_cast<std::size_t>(j) * n + i] = 0;
            sepset[{std::min(i, j), std::max(i, j)}] = s;
            removed = true;
          }
        });
      }
    if (!any) break;
  }

  MixedGraph g(n);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (adjacent(a, b)) g.set_undirected(a, b);

  for (int k = 0; k < n; ++k)
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        if (a == k || b == k || !adjacent(a, k) || !adjacent(b, k) || adjacent(a, b)) continue;
        const auto& s = sepset[{a, b}];
        if (std::find(s.begin(), s.end(), k) != s.end()) continue;
        for (int x : {a, b}) {
          if (g.directed(x, k)) continue;
          if (!g.orient(x, k)) ++result.conflicts;
        }
      }
  apply_meek_rules(g);
  result.cpdag = g.to_cpdag();
  return result;
}

inline PcResult pc_fit(const Dataset& d, double alpha, int max_cond) {
  const int n = detail::dense_universe_size(d);
  return pc_fit(n, fisher_z_tester(d, alpha), max_cond);
}

// ---------------------------------------------------------------------------
// Confidence-level selection

/// F1 score of predicted dependence (label 0) against true d-connection.
inline double dependence_f1(const std::vector<int>& predicted_independent, const std::vector<int>& true_independent) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < predicted_independent.size(); ++i) {
    const bool pred_dep = predicted_independent[i] == 0;
    const bool true_dep = true_independent[i] == 0;
    tp += pred_dep && true_dep;
    fp += pred_dep && !true_dep;
    fn += !pred_dep && true_dep;
  }
  if (tp + fp + fn == 0) return 1.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

/// All queries with conditioning sets of size 0 and 1.
inline std::vector<Query> ci_queries_upto1(int n) {
  auto q = enumerate_queries(n, QueryKind::CondIndep, 0);
  auto q1 = enumerate_queries(n, QueryKind::CondIndep, 1);
  q.insert(q.end(), q1.begin(), q1.end());
  return q;
}

struct AlphaScore {
  double alpha;
  double mean_f1;
};

/// Mean dependence-F1 per candidate alpha over the given samples; returns the
/// candidate with the largest mean, ties toward the smaller alpha.
inline double select_alpha(std::span<const double> candidates, std::span<const ScmSample> samples,
                           std::vector<AlphaScore>* scores = nullptr) {
  if (candidates.empty()) throw Error(Errc::InvalidParams, "no candidate alphas");
  std::vector<double> total(candidates.size(), 0.0);
  for (const auto& s : samples) {
    const int n = detail::dense_universe_size(s.dataset);
    const CorrelationMatrix corr(s.dataset);
    const auto queries = ci_queries_upto1(n);
    std::vector<int> truth;
    std::vector<double> pvals;
    truth.reserve(queries.size());
    for (const auto& q : queries) {
      truth.push_back(d_separated(s.truth, q) ? 1 : 0);
      pvals.push_back(*fisher_z_ci(corr, q, 0.5).p_value);
    }
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      std::vector<int> pred(pvals.size());
      for (std::size_t i = 0; i < pvals.size(); ++i) pred[i] = pvals[i] > candidates[c] ? 1 : 0;
      total[c] += dependence_f1(pred, truth);
    }
  }
  std::size_t best = 0;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const double mc = total[c] / static_cast<double>(std::max<std::size_t>(samples.size(), 1));
    const double mb = total[best] / static_cast<double>(std::max<std::size_t>(samples.size(), 1));
    if (mc > mb || (mc == mb && candidates[c] < candidates[best])) best = c;
    if (scores) scores->push_back({candidates[c], mc});
  }
  return candidates[best];
}

/// Samples each SCM with its seed, then selects alpha as above.
inline double select_alpha(std::span<const double> candidates, std::span<const LinearScm> scms, Eigen::Index l,
                           std::span<const std::uint64_t> seeds, std::vector<AlphaScore>* scores = nullptr) {
  if (seeds.size() != scms.size()) throw Error(Errc::LengthMismatch, "need one seed per SCM");
  std::vector<ScmSample> samples;
  for (std::size_t i = 0; i < scms.size(); ++i) samples.push_back(sample(scms[i], l, seeds[i]));
  return select_alpha(candidates, samples, scores);
}

// ---------------------------------------------------------------------------
// Polytrees from bivariate ANM tests

struct PolytreeFit {
  Polytree tree;
  /// The k sampled ordered pairs with their test outcomes.
  std::vector<LabeledQuery> training;
  /// Edges dropped to break undirected cycles, in removal order.
  std::vector<Edge> removed;
};

namespace detail {

struct TestedEdge {
  Edge edge;
  double p_value;
};

// Returns indices (into `edges`) of some undirected cycle, or empty.
inline std::vector<std::size_t> find_cycle(int n, const std::vector<TestedEdge>& edges) {
  DisjointSets ds(n);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [a, b] = edges[e].edge;
    if (ds.unite(a, b)) continue;
    // path a ~> b through earlier edges
    std::vector<std::vector<std::pair<int, std::size_t>>> nb(static_cast<std::size_t>(n));
    for (std::size_t f = 0; f < e; ++f) {
      nb[edges[f].edge.first].emplace_back(edges[f].edge.second, f);
      nb[edges[f].edge.second].emplace_back(edges[f].edge.first, f);
    }
    std::vector<std::ptrdiff_t> via(static_cast<std::size_t>(n), -1);
    std::vector<int> from(static_cast<std::size_t>(n), -1);
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::deque<int> todo{a};
    seen[a] = 1;
    while (!todo.empty()) {
      int v = todo.front();
      todo.pop_front();
      if (v == b) break;
      for (auto [w, f] : nb[v])
        if (!seen[w]) {
          seen[w] = 1;
          via[w] = static_cast<std::ptrdiff_t>(f);
          from[w] = v;
          todo.push_back(w);
        }
    }
    std::vector<std::size_t> cycle{e};
    for (int v = b; v != a; v = from[v]) cycle.push_back(static_cast<std::size_t>(via[v]));
    return cycle;
  }
  return {};
}

}  // namespace detail

/// Three steps: test k random ordered pairs; add source -> target whenever the
/// test returns 1; while an undirected cycle exists, drop its edge with the
/// lowest residual-independence p-value.
inline PolytreeFit polytree_from_tests(int n, const Tester& test, std::size_t k, std::uint64_t seed) {
  const auto universe = enumerate_queries(n, QueryKind::OrderedPair);
  if (k < 1 || k > universe.size()) throw Error(Errc::KTooLarge, "k must lie in 1..n(n-1)");
  PolytreeFit fit;
  std::vector<detail::TestedEdge> edges;
  for (const auto& q : sample_queries(universe, k, seed)) {
    TestOutcome o = test(q);
    if (std::get<Binary>(o.value).value == 1) edges.push_back({{q.first(), q.second()}, o.p_value.value_or(0.0)});
    fit.training.push_back({q, std::move(o)});
  }
  while (true) {
    const auto cycle = detail::find_cycle(n, edges);
    if (cycle.empty()) break;
    std::size_t drop = cycle.front();
    for (std::size_t e : cycle)
      if (edges[e].p_value < edges[drop].p_value || (edges[e].p_value == edges[drop].p_value && e < drop)) drop = e;
    fit.removed.push_back(edges[drop].edge);
    edges.erase(edges.begin() + static_cast<std::ptrdiff_t>(drop));
  }
  std::vector<Edge> kept;
  for (const auto& e : edges) kept.push_back(e.edge);
  fit.tree = Polytree(n, kept);
  return fit;
}

inline PolytreeFit polytree_from_anm(const Dataset& d, std::size_t k, double alpha, std::uint64_t seed,
                                     const AnmConfig& cfg = {}) {
  const int n = detail::dense_universe_size(d);
  return polytree_from_tests(n, anm_tester(d, alpha, cfg), k, seed);
}

// ---------------------------------------------------------------------------
// Collider-free paths

/// Greedy chain: start from the pair with maximal |corr|, then repeatedly
/// attach the unused variable with maximal |corr| to either chain end.
inline PathModel fit_path_model(const Dataset& d) {
  const int n = detail::dense_universe_size(d);
  if (n < 2) throw Error(Errc::InvalidN, "need at least two variables");
  const CorrelationMatrix corr(d);
  for (int a = 0; a < n; ++a) {
    if (corr.is_constant(a)) throw Error(Errc::DegenerateInput, "variable " + std::to_string(a) + " is constant");
    for (int b = a + 1; b < n; ++b)
      if (std::abs(corr(a, b)) <= 1e-12) throw Error(Errc::ZeroCorrelation, std::to_string(a) + "," + std::to_string(b));
  }
  int sa = 0, sb = 1;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (std::abs(corr(a, b)) > std::abs(corr(sa, sb))) sa = a, sb = b;
  std::deque<int> chain{sa, sb};
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  used[sa] = used[sb] = 1;
  while (static_cast<int>(chain.size()) < n) {
    int best = -1;
    bool at_front = false;
    double best_abs = -1.0;
    for (int v = 0; v < n; ++v) {
      if (used[v]) continue;
      const double f = std::abs(corr(chain.front(), v));
      const double b = std::abs(corr(chain.back(), v));
      if (f > best_abs) best_abs = f, best = v, at_front = true;
      if (b > best_abs) best_abs = b, best = v, at_front = false;
    }
    used[best] = 1;
    if (at_front)
      chain.push_front(best);
    else
      chain.push_back(best);
  }
  std::vector<int> order(chain.begin(), chain.end());
  std::vector<double> r;
  for (std::size_t i = 0; i + 1 < order.size(); ++i) r.push_back(corr(order[i], order[i + 1]));
  return PathModel(std::move(order), std::move(r));
}

}  // namespace causalvc
