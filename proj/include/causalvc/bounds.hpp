#pragma once

// VC-dimension upper bounds for the causal model classes, the binary and
// real-valued generalization gaps, the test-budget planner and exhaustive
// cross-checks of the capacity bounds for small n.

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "causalvc/models.hpp"

namespace causalvc {

enum class ModelClass { AllDags, Polytrees, PathSign, PathCorr, Directionality };

inline std::string_view model_class_name(ModelClass c) {
  switch (c) {
    case ModelClass::AllDags: return "alldags";
    case ModelClass::Polytrees: return "polytrees";
    case ModelClass::PathSign: return "pathsign";
    case ModelClass::PathCorr: return "pathcorr";
    case ModelClass::Directionality: return "directionality";
  }
  return "?";
}

inline ModelClass parse_model_class(std::string_view s) {
  for (auto c : {ModelClass::AllDags, ModelClass::Polytrees, ModelClass::PathSign, ModelClass::PathCorr,
                 ModelClass::Directionality})
    if (model_class_name(c) == s) return c;
  throw Error(Errc::ParseError, "unknown model class '" + std::string(s) + "'");
}

struct BoundsConfig {
  /// h = path_corr_constant * n for correlations along collider-free paths.
  /// The capacity is only known up to a constant; outputs for this class
  /// hold up to this configured factor.
  double path_corr_constant = 4.0;
};

inline double vc_upper_bound(ModelClass c, int n, const BoundsConfig& cfg = {}) {
  if (n < 2) throw Error(Errc::InvalidN, "n must be >= 2");
  const double nd = n;
  switch (c) {
    case ModelClass::AllDags: return nd * std::log2(nd) + nd * (nd - 1.0) / 2.0;
    case ModelClass::Polytrees: return nd * (std::log2(nd) + 1.0);
    case ModelClass::PathSign: return nd;
    case ModelClass::PathCorr: return cfg.path_corr_constant * nd;
    case ModelClass::Directionality: return nd - 1.0;
  }
  return 0.0;
}

namespace detail {

inline void check_gap_params(double h, std::uint64_t k, double eta) {
  if (!(h > 0.0)) throw Error(Errc::InvalidParams, "h must be positive");
  if (k < 1) throw Error(Errc::InvalidParams, "k must be >= 1");
  if (!(eta > 0.0 && eta < 1.0)) throw Error(Errc::InvalidParams, "eta must lie in (0,1)");
}

}  // namespace detail

/// Binary-loss generalization gap holding with probability 1 - eta:
///   2 sqrt((h (ln(2k/h) + 1) - ln(eta/9)) / k), clamped to [0, 1].
/// Returns the trivial gap 1 when 2k/h <= 1.
inline double gap_binary(double h, std::uint64_t k, double eta) {
  detail::check_gap_params(h, k, eta);
  const double kd = static_cast<double>(k);
  if (2.0 * kd / h <= 1.0) return 1.0;
  const double inner = (h * (std::log(2.0 * kd / h) + 1.0) - std::log(eta / 9.0)) / kd;
  return std::clamp(2.0 * std::sqrt(std::max(inner, 0.0)), 0.0, 1.0);
}

/// Gap for [a, b]-valued properties:
///   (b - a) sqrt((h (ln(k/h) + 1) - ln(eta/4)) / k), clamped to [0, b - a].
/// Returns the trivial gap b - a when k/h <= 1.
inline double gap_real(double h, std::uint64_t k, double eta, double a, double b) {
  detail::check_gap_params(h, k, eta);
  if (!(b > a)) throw Error(Errc::InvalidParams, "need b > a");
  const double kd = static_cast<double>(k);
  const double range = b - a;
  if (kd / h <= 1.0) return range;
  const double inner = (h * (std::log(kd / h) + 1.0) - std::log(eta / 4.0)) / kd;
  return std::clamp(range * std::sqrt(std::max(inner, 0.0)), 0.0, range);
}

struct BoundReport {
  ModelClass model_class;
  int n;
  double h;
  std::uint64_t k;
  double eta;
  double empirical_risk;
  double gap;
  double bound;
  /// Set for PathCorr, whose capacity constant is configured rather than known.
  std::optional<double> capacity_constant;
};

inline BoundReport bound_report(ModelClass c, int n, std::uint64_t k, double eta, double empirical_risk,
                                const BoundsConfig& cfg = {}) {
  BoundReport r{c, n, vc_upper_bound(c, n, cfg), k, eta, empirical_risk, 0.0, 0.0, std::nullopt};
  if (c == ModelClass::PathCorr) {
    r.gap = gap_real(r.h, k, eta, -1.0, 1.0);
    r.capacity_constant = cfg.path_corr_constant;
  } else {
    r.gap = gap_binary(r.h, k, eta);
  }
  r.bound = empirical_risk + r.gap;
  return r;
}

/// Number of allowed inputs; matches enumerate_queries(n, kind, cond_size).size().
inline std::uint64_t count_queries(int n, QueryKind kind, int cond_size = 0) {
  if (n < 2) throw Error(Errc::InvalidSize, "n must be >= 2");
  if (cond_size < 0) throw Error(Errc::InvalidSize, "cond_size must be >= 0");
  auto choose = [](std::uint64_t a, std::uint64_t b) {
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= b; ++i) r = r * (a - b + i) / i;
    return r;
  };
  const auto nn = static_cast<std::uint64_t>(n);
  switch (kind) {
    case QueryKind::CondIndep:
      if (cond_size > n - 2) throw Error(Errc::InvalidSize, "cond_size must be <= n-2");
      return nn * (nn - 1) / 2 * choose(nn - 2, static_cast<std::uint64_t>(cond_size));
    case QueryKind::OrderedPair: return nn * (nn - 1);
    case QueryKind::UnorderedPair: return nn * (nn - 1) / 2;
    case QueryKind::OrderedTuple: {
      const int len = cond_size + 2;
      if (len > n) throw Error(Errc::InvalidSize, "tuple longer than universe");
      std::uint64_t r = 1;
      for (int i = 0; i < len; ++i) r *= nn - static_cast<std::uint64_t>(i);
      return r;
    }
  }
  return 0;
}

/// Smallest k with gap_binary(vc_upper_bound(c, n), k, eta) <= eps, by
/// doubling and bisection.
inline std::uint64_t min_training_sets(ModelClass c, int n, double eps, double eta, const BoundsConfig& cfg = {}) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error(Errc::InvalidParams, "eps must lie in (0,1)");
  const double h = vc_upper_bound(c, n, cfg);
  auto ok = [&](std::uint64_t k) { return gap_binary(h, k, eta) <= eps; };
  std::uint64_t hi = 1;
  while (!ok(hi)) {
    if (hi > (std::uint64_t{1} << 62)) throw Error(Errc::InvalidParams, "no feasible k");
    hi *= 2;
  }
  std::uint64_t lo = hi / 2;  // ok(lo) is false unless hi == 1
  if (hi == 1) return 1;
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

// ---------------------------------------------------------------------------
// Exhaustive capacity checks for small n

/// Every labeled DAG on n nodes (n <= 5 is practical).
inline std::vector<Dag> all_dags(int n) {
  std::vector<Edge> pairs;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < pairs.size(); ++i) total *= 3;
  std::vector<Dag> out;
  for (std::uint64_t code = 0; code < total; ++code) {
    std::vector<Edge> e;
    std::uint64_t c = code;
    for (auto [a, b] : pairs) {
      const auto t = c % 3;
      c /= 3;
      if (t == 1) e.emplace_back(a, b);
      if (t == 2) e.emplace_back(b, a);
    }
    try {
      out.emplace_back(n, e);
    } catch (const Error&) {
      // cyclic orientation
    }
  }
  return out;
}

/// Every full query universe the class predicts on.
inline std::vector<Query> class_query_universe(ModelClass c, int n) {
  switch (c) {
    case ModelClass::AllDags:
    case ModelClass::Polytrees: {
      std::vector<Query> all;
      for (int s = 0; s <= n - 2; ++s) {
        auto q = enumerate_queries(n, QueryKind::CondIndep, s);
        all.insert(all.end(), q.begin(), q.end());
      }
      return all;
    }
    case ModelClass::PathSign:
    case ModelClass::PathCorr: return enumerate_queries(n, QueryKind::UnorderedPair);
    case ModelClass::Directionality: return enumerate_queries(n, QueryKind::OrderedPair);
  }
  return {};
}

/// Distinct 0/1 prediction vectors realized by the binary classes on their
/// full query universe.
inline std::set<std::vector<char>> realized_functions(ModelClass c, int n) {
  if (n < 2) throw Error(Errc::InvalidN, "n must be >= 2");
  if (n > 4) throw Error(Errc::NTooLarge, "exhaustive checks need n <= 4");
  if (c == ModelClass::PathCorr) throw Error(Errc::InvalidParams, "path correlations are real-valued");
  const auto queries = class_query_universe(c, n);
  std::set<std::vector<char>> funcs;
  if (c == ModelClass::PathSign) {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    do {
      for (int code = 0; code < (1 << (n - 1)); ++code) {
        std::vector<double> r;
        for (int i = 0; i < n - 1; ++i) r.push_back((code >> i) & 1 ? -0.5 : 0.5);
        const PathModel m(order, r);
        std::vector<char> f;
        for (const auto& q : queries) f.push_back(std::get<Sign>(path_sign(m, q)).value > 0 ? 1 : 0);
        funcs.insert(std::move(f));
      }
    } while (std::next_permutation(order.begin(), order.end()));
    return funcs;
  }
  for (const auto& g : all_dags(n)) {
    if (c == ModelClass::Polytrees && !is_polytree(g)) continue;
    std::vector<char> f;
    for (const auto& q : queries) {
      const PropertyValue v = c == ModelClass::Directionality ? q_dirpath(g, q) : q_ci_dag(g, q);
      f.push_back(static_cast<char>(std::get<Binary>(v).value));
    }
    funcs.insert(std::move(f));
  }
  return funcs;
}

/// Number of distinct predictor functions the class realizes (n <= 4).
inline std::uint64_t brute_force_vc_check(ModelClass c, int n) { return realized_functions(c, n).size(); }

/// Exact VC dimension of a finite function class over a finite domain:
/// the largest subset of domain points on which all 2^h labelings occur.
/// Shattered sets are closed under taking subsets, so sizes grow level by level.
inline int exact_vc_dimension(const std::set<std::vector<char>>& funcs) {
  if (funcs.empty()) return 0;
  const std::size_t domain = funcs.begin()->size();
  std::vector<std::vector<std::size_t>> level{{}};
  int h = 0;
  while (!level.empty()) {
    std::set<std::vector<std::size_t>> next;
    for (const auto& s : level) {
      const std::size_t start = s.empty() ? 0 : s.back() + 1;
      for (std::size_t p = start; p < domain; ++p) {
        std::vector<std::size_t> t = s;
        t.push_back(p);
        std::set<std::vector<char>> patterns;
        for (const auto& f : funcs) {
          std::vector<char> pat;
          for (std::size_t i : t) pat.push_back(f[i]);
          patterns.insert(std::move(pat));
        }
        if (patterns.size() == (std::size_t{1} << t.size())) next.insert(std::move(t));
      }
    }
    if (next.empty()) break;
    ++h;
    level.assign(next.begin(), next.end());
  }
  return h;
}

/// Markov-class counts of orientations of every spanning-tree skeleton on n
/// nodes, one entry per tree.
inline std::vector<std::uint64_t> polytree_classes_per_tree(int n) {
  if (n > 5) throw Error(Errc::NTooLarge, "exhaustive checks need n <= 5");
  std::vector<Edge> pairs;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
  std::vector<std::uint64_t> out;
  const auto m = pairs.size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    if (std::popcount(mask) != n - 1) continue;
    std::vector<Edge> tree;
    for (std::size_t i = 0; i < m; ++i)
      if (mask >> i & 1) tree.push_back(pairs[i]);
    detail::DisjointSets ds(n);
    bool is_tree = true;
    for (auto [a, b] : tree) is_tree = is_tree && ds.unite(a, b);
    if (!is_tree) continue;
    std::set<std::vector<std::array<int, 3>>> classes;
    for (std::uint64_t o = 0; o < (std::uint64_t{1} << tree.size()); ++o) {
      std::vector<Edge> e;
      for (std::size_t i = 0; i < tree.size(); ++i)
        e.push_back(o >> i & 1 ? Edge{tree[i].second, tree[i].first} : tree[i]);
      classes.insert(v_structures(Dag(n, e)));
    }
    out.push_back(classes.size());
  }
  return out;
}

}  // namespace causalvc
