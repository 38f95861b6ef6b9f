#include <gtest/gtest.h>

#include "causalvc/bounds.hpp"

using namespace causalvc;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no Error thrown";
  return Errc::ParseError;
}

}  // namespace

TEST(VcBound, ClosedForms) {
  EXPECT_NEAR(vc_upper_bound(ModelClass::AllDags, 10), 78.2193, 1e-4);
  EXPECT_DOUBLE_EQ(vc_upper_bound(ModelClass::Polytrees, 8), 32.0);
  EXPECT_DOUBLE_EQ(vc_upper_bound(ModelClass::PathSign, 5), 5.0);
  EXPECT_DOUBLE_EQ(vc_upper_bound(ModelClass::PathCorr, 5), 20.0);
  BoundsConfig cfg;
  cfg.path_corr_constant = 2.5;
  EXPECT_DOUBLE_EQ(vc_upper_bound(ModelClass::PathCorr, 4, cfg), 10.0);
  EXPECT_DOUBLE_EQ(vc_upper_bound(ModelClass::Directionality, 7), 6.0);
  EXPECT_EQ(code_of([] { vc_upper_bound(ModelClass::AllDags, 1); }), Errc::InvalidN);
}

TEST(VcBound, PolytreesBelowDags) {
  // at n = 2 the polytree form (4) exceeds the DAG form (3); equal at n = 3
  EXPECT_GT(vc_upper_bound(ModelClass::Polytrees, 2), vc_upper_bound(ModelClass::AllDags, 2));
  for (int n = 3; n < 300; ++n)
    EXPECT_LE(vc_upper_bound(ModelClass::Polytrees, n), vc_upper_bound(ModelClass::AllDags, n));
}

TEST(GapBinary, HandEvaluated) {
  // 10 (ln 200 + 1) - ln(1/90) = 67.481..., 2 sqrt(0.067481) = 0.51955
  EXPECT_NEAR(gap_binary(10, 1000, 0.1), 0.5196, 0.001);
}

TEST(GapBinary, LimitsAndMonotonicity) {
  const double g3 = gap_binary(10, 1000, 0.1), g6 = gap_binary(10, 1000000, 0.1), g9 = gap_binary(10, 1000000000, 0.1);
  EXPECT_GT(g3, g6);
  EXPECT_GT(g6, g9);
  EXPECT_LT(g9, 1e-3);
  EXPECT_GT(gap_binary(10, 5000, 0.01), gap_binary(10, 5000, 0.1));
  EXPECT_GT(gap_binary(20, 5000, 0.1), gap_binary(10, 5000, 0.1));
}

TEST(GapBinary, StrictDecreaseOnGrid) {
  for (double h : {1.0, 5.0, 33.3, 200.0})
    for (double eta : {0.01, 0.1, 0.5})
      for (std::uint64_t k = static_cast<std::uint64_t>(h / 2) + 1; k < 200000; k = k * 3 / 2 + 1) {
        const double a = gap_binary(h, k, eta), b = gap_binary(h, k + 1, eta);
        if (a < 1.0) {
          EXPECT_LT(b, a) << h << " " << k;
        }
        if (a < 1.0) {
          EXPECT_LT(a, gap_binary(h, k, eta / 2));
        }
      }
}

TEST(GapBinary, TrivialAndErrors) {
  EXPECT_EQ(gap_binary(100, 50, 0.1), 1.0);
  EXPECT_EQ(gap_binary(100, 51, 0.1), 1.0);  // clamped
  EXPECT_EQ(code_of([] { gap_binary(0, 10, 0.1); }), Errc::InvalidParams);
  EXPECT_EQ(code_of([] { gap_binary(1, 0, 0.1); }), Errc::InvalidParams);
  EXPECT_EQ(code_of([] { gap_binary(1, 10, 1.0); }), Errc::InvalidParams);
}

TEST(GapReal, HandEvaluated) {
  // 20 (ln 250 + 1) - ln 0.025 = 134.12..., 2 sqrt(134.12/5000) = 0.3276
  EXPECT_NEAR(gap_real(20, 5000, 0.1, -1, 1), 0.327, 0.001);
  EXPECT_NEAR(gap_real(20, 5000, 0.1, -2, 2), 2 * gap_real(20, 5000, 0.1, -1, 1), 1e-12);
  EXPECT_EQ(gap_real(20, 20, 0.1, -1, 1), 2.0);
  EXPECT_EQ(code_of([] { gap_real(1, 10, 0.1, 1, 1); }), Errc::InvalidParams);
  for (std::uint64_t k = 21; k < 100000; k = k * 2)
    if (gap_real(20, k, 0.1, 0, 1) < 1.0) {
      EXPECT_LT(gap_real(20, k + 1, 0.1, 0, 1), gap_real(20, k, 0.1, 0, 1));
    }
}

TEST(BoundReport, SumsRiskAndGap) {
  const auto r = bound_report(ModelClass::AllDags, 10, 1000, 0.1, 0.05);
  EXPECT_DOUBLE_EQ(r.gap, gap_binary(vc_upper_bound(ModelClass::AllDags, 10), 1000, 0.1));
  EXPECT_DOUBLE_EQ(r.bound, 0.05 + r.gap);
  EXPECT_FALSE(r.capacity_constant);
  const auto p = bound_report(ModelClass::PathCorr, 10, 100000, 0.1, 0.0);
  EXPECT_DOUBLE_EQ(p.gap, gap_real(40, 100000, 0.1, -1, 1));
  EXPECT_TRUE(p.capacity_constant);
}

TEST(CountQueries, ClosedForms) {
  EXPECT_EQ(count_queries(10, QueryKind::CondIndep, 1), 360u);
  EXPECT_EQ(count_queries(100, QueryKind::CondIndep, 1), 485100u);
  EXPECT_EQ(count_queries(3, QueryKind::UnorderedPair), 3u);
  EXPECT_EQ(count_queries(20, QueryKind::OrderedPair), 380u);
  EXPECT_EQ(code_of([] { count_queries(4, QueryKind::CondIndep, 3); }), Errc::InvalidSize);
  for (int n = 2; n <= 7; ++n) {
    for (int s = 0; s <= n - 2; ++s) {
      EXPECT_EQ(count_queries(n, QueryKind::CondIndep, s), enumerate_queries(n, QueryKind::CondIndep, s).size());
      EXPECT_EQ(count_queries(n, QueryKind::OrderedTuple, s), enumerate_queries(n, QueryKind::OrderedTuple, s).size());
    }
    EXPECT_EQ(count_queries(n, QueryKind::OrderedPair), enumerate_queries(n, QueryKind::OrderedPair).size());
  }
}

TEST(MinTrainingSets, StraddlesTarget) {
  for (auto c : {ModelClass::AllDags, ModelClass::Polytrees, ModelClass::PathSign, ModelClass::Directionality})
    for (int n : {3, 10, 50})
      for (double eps : {0.05, 0.1, 0.3}) {
        const auto k = min_training_sets(c, n, eps, 0.1);
        const double h = vc_upper_bound(c, n);
        EXPECT_LE(gap_binary(h, k, 0.1), eps);
        EXPECT_GT(gap_binary(h, k - 1, 0.1), eps);
      }
}

TEST(MinTrainingSets, MonotoneInN) {
  std::uint64_t prev = 0;
  for (int n = 2; n <= 120; ++n) {
    const auto k = min_training_sets(ModelClass::Polytrees, n, 0.1, 0.1);
    EXPECT_GE(k, prev);
    prev = k;
  }
  EXPECT_EQ(code_of([] { min_training_sets(ModelClass::Polytrees, 5, 1.0, 0.1); }), Errc::InvalidParams);
}

TEST(BruteForce, DagMarkovClasses) {
  EXPECT_EQ(brute_force_vc_check(ModelClass::AllDags, 3), 11u);
  EXPECT_EQ(brute_force_vc_check(ModelClass::AllDags, 4), 185u);
  EXPECT_EQ(brute_force_vc_check(ModelClass::AllDags, 2), 2u);
}

TEST(BruteForce, LogCountBelowBoundForDagsPolytreesSigns) {
  for (int n = 2; n <= 4; ++n)
    for (auto c : {ModelClass::AllDags, ModelClass::Polytrees, ModelClass::PathSign}) {
      const double count = static_cast<double>(brute_force_vc_check(c, n));
      EXPECT_LE(std::log2(count), vc_upper_bound(c, n)) << model_class_name(c) << " n=" << n;
    }
}

TEST(BruteForce, PathSignFunctions) {
  // sign patterns are s_i * s_j for a node labelling s, identified up to a
  // global flip
  EXPECT_EQ(brute_force_vc_check(ModelClass::PathSign, 3), 4u);
  EXPECT_EQ(brute_force_vc_check(ModelClass::PathSign, 4), 8u);
}

TEST(BruteForce, ExactVcDimension) {
  for (int n = 2; n <= 4; ++n)
    for (auto c : {ModelClass::AllDags, ModelClass::Polytrees, ModelClass::PathSign}) {
      const int h = exact_vc_dimension(realized_functions(c, n));
      EXPECT_LE(h, vc_upper_bound(c, n)) << model_class_name(c) << " n=" << n;
    }
}

TEST(BruteForce, DirectionalityExceedsNMinusOneAtFourNodes) {
  EXPECT_EQ(exact_vc_dimension(realized_functions(ModelClass::Directionality, 2)), 1);
  EXPECT_LE(exact_vc_dimension(realized_functions(ModelClass::Directionality, 3)), 2);
  // 0->1, 0->2, 3->1, 3->2 close an undirected 4-cycle, yet every labelling
  // is realized: sources {0, 3}, sinks {1, 2}, no path has length two
  const std::vector<Query> pairs{Query::ordered_pair(0, 1), Query::ordered_pair(0, 2), Query::ordered_pair(3, 1),
                                 Query::ordered_pair(3, 2)};
  for (int mask = 0; mask < 16; ++mask) {
    std::vector<Edge> edges;
    for (int i = 0; i < 4; ++i)
      if (mask >> i & 1) edges.push_back({pairs[i].first(), pairs[i].second()});
    const Dag g(4, edges);
    for (int i = 0; i < 4; ++i) EXPECT_EQ(std::get<Binary>(q_dirpath(g, pairs[i])).value, mask >> i & 1);
  }
  EXPECT_EQ(exact_vc_dimension(realized_functions(ModelClass::Directionality, 4)), 4);
  EXPECT_EQ(vc_upper_bound(ModelClass::Directionality, 4), 3.0);
}

TEST(BruteForce, ExactVcDimensionOfSimpleClasses) {
  // thresholds on 4 points: VC dimension 1
  std::set<std::vector<char>> thr{{0, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 1}, {0, 1, 1, 1}, {1, 1, 1, 1}};
  EXPECT_EQ(exact_vc_dimension(thr), 1);
  std::set<std::vector<char>> all;
  for (int m = 0; m < 8; ++m) all.insert({char(m & 1), char(m >> 1 & 1), char(m >> 2 & 1)});
  EXPECT_EQ(exact_vc_dimension(all), 3);
}

TEST(BruteForce, PolytreeClassesPerSkeleton) {
  for (int n = 2; n <= 5; ++n) {
    const auto per_tree = polytree_classes_per_tree(n);
    const std::uint64_t cap = (std::uint64_t{1} << (n - 1)) - static_cast<std::uint64_t>(n) + 1;
    // Cayley: n^(n-2) labeled trees
    std::uint64_t trees = 1;
    for (int i = 0; i < n - 2; ++i) trees *= static_cast<std::uint64_t>(n);
    EXPECT_EQ(per_tree.size(), trees);
    for (auto c : per_tree) EXPECT_LE(c, cap);
  }
  // the star on 4 nodes attains the cap 2^3 - 4 + 1 = 5
  const auto four = polytree_classes_per_tree(4);
  EXPECT_EQ(*std::max_element(four.begin(), four.end()), 5u);
}

TEST(BruteForce, Errors) {
  EXPECT_EQ(code_of([] { brute_force_vc_check(ModelClass::AllDags, 5); }), Errc::NTooLarge);
  EXPECT_EQ(code_of([] { brute_force_vc_check(ModelClass::PathCorr, 3); }), Errc::InvalidParams);
}
