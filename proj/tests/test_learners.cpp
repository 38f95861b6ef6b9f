#include <gtest/gtest.h>

#include "causalvc/learners.hpp"
#include "oracles.hpp"

using namespace causalvc;

namespace {

Tester dsep_oracle(const Dag& g) {
  return [g](const Query& q) { return TestOutcome{q_ci_dag(g, q), std::nullopt, std::nullopt, std::nullopt}; };
}

Tester table_tester(std::map<Edge, double> accepted) {
  return [accepted](const Query& q) {
    auto it = accepted.find({q.first(), q.second()});
    if (it == accepted.end()) return TestOutcome{Binary{0}, 0.9, 0.05, std::nullopt};
    return TestOutcome{Binary{1}, it->second, 0.05, std::nullopt};
  };
}

Eigen::MatrixXd chain_cov(const std::vector<int>& order, const std::vector<double>& r) {
  const int n = static_cast<int>(order.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double p = 1;
      for (int k = i; k < j; ++k) p *= r[k];
      c(order[i], order[j]) = c(order[j], order[i]) = p;
    }
  return c;
}

}  // namespace

TEST(Pc, OracleChain) {
  const auto r = pc_fit(3, dsep_oracle(Dag(3, {{0, 1}, {1, 2}})), 1);
  EXPECT_TRUE(r.cpdag.directed().empty());
  EXPECT_EQ(r.cpdag.undirected(), (std::vector<Edge>{{0, 1}, {1, 2}}));
}

TEST(Pc, OracleCollider) {
  const auto r = pc_fit(3, dsep_oracle(Dag(3, {{0, 2}, {1, 2}})), 1);
  EXPECT_EQ(r.cpdag.directed(), (std::vector<Edge>{{0, 2}, {1, 2}}));
  EXPECT_TRUE(r.cpdag.undirected().empty());
}

TEST(Pc, AllIndependentData) {
  Eigen::MatrixXd m(2000, 4);
  Rng rng = make_rng(3);
  std::normal_distribution<double> z;
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = z(rng);
  const auto r = pc_fit(Dataset(m, {0, 1, 2, 3}), 0.001, 1);
  EXPECT_TRUE(r.cpdag.directed().empty());
  EXPECT_TRUE(r.cpdag.undirected().empty());
  EXPECT_EQ(r.training.size(), 6u);
}

TEST(Pc, TrainingSetIsDeduplicated) {
  const auto r = pc_fit(5, dsep_oracle(Dag(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}})), 2);
  std::set<Query> seen;
  for (const auto& t : r.training) EXPECT_TRUE(seen.insert(t.query).second);
}

TEST(Pc, RecoversMarkovClassWithUnboundedConditioning) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 150; ++t) {
    const int n = 3 + t % 4;
    const Dag g = oracle::random_dag(n, 0.5, rng);
    const auto r = pc_fit(n, dsep_oracle(g), n - 2);
    EXPECT_TRUE(markov_equivalent(random_dag_from_cpdag(r.cpdag, t), g));
  }
}

// With bounded conditioning an edge whose only separating sets are larger
// survives, so label reproduction is only guaranteed for max_cond = n - 2.
TEST(Pc, OracleRunReproducesItsTrainingLabels) {
  std::mt19937_64 rng(13);
  int total = 0;
  for (int t = 0; t < 200; ++t) {
    const int n = 3 + t % 4;
    const Dag g = oracle::random_dag(n, 0.4, rng);
    const auto r = pc_fit(n, dsep_oracle(g), n - 2);
    for (std::uint64_t s = 0; s < 3; ++s) {
      const Dag ext = random_dag_from_cpdag(r.cpdag, s);
      for (const auto& lq : r.training) {
        ASSERT_EQ(q_ci_dag(ext, lq.query), lq.outcome.value);
        ++total;
      }
    }
  }
  EXPECT_GT(total, 1000);
}

TEST(Pc, DeterministicOnData) {
  const auto scm = gen_linear_scm(8, 1.5, 4);
  const auto d = sample(scm, 3000, 5).dataset;
  const auto a = pc_fit(d, 0.01, 1);
  const auto b = pc_fit(d, 0.01, 1);
  EXPECT_EQ(a.cpdag, b.cpdag);
  ASSERT_EQ(a.training.size(), b.training.size());
  for (std::size_t i = 0; i < a.training.size(); ++i) EXPECT_EQ(a.training[i].query, b.training[i].query);
}

TEST(Pc, RequiresDenseUniverse) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Random(50, 2);
  EXPECT_THROW(pc_fit(Dataset(m, {0, 2}), 0.05, 1), Error);
}

TEST(SelectAlpha, SingleCandidate) {
  const std::vector<double> c{0.2};
  const std::vector<LinearScm> scms{gen_linear_scm(5, 1.5, 1)};
  const std::vector<std::uint64_t> seeds{2};
  EXPECT_EQ(select_alpha(c, scms, 500, seeds), 0.2);
}

TEST(SelectAlpha, F1Definition) {
  // predicted dependence = label 0
  EXPECT_DOUBLE_EQ(dependence_f1({0, 0, 1, 1}, {0, 1, 0, 1}), 2.0 * 1 / (2 * 1 + 1 + 1));
  EXPECT_DOUBLE_EQ(dependence_f1({1, 1}, {1, 1}), 1.0);
}

TEST(SelectAlpha, SmallAlphaNeverWorseOnLargeSamples) {
  const std::vector<double> c{0.5, 0.001};
  for (std::uint64_t s = 0; s < 5; ++s) {
    const std::vector<LinearScm> scms{gen_linear_scm(8, 1.5, s)};
    const std::vector<std::uint64_t> seeds{s + 100};
    std::vector<AlphaScore> scores;
    select_alpha(c, scms, 20000, seeds, &scores);
    ASSERT_EQ(scores.size(), 2u);
    EXPECT_GE(scores[1].mean_f1, scores[0].mean_f1);
  }
}

TEST(SelectAlpha, ReplicatesReportedLevel) {
  const std::vector<double> candidates{0.1, 0.05, 0.01, 0.001};
  std::vector<LinearScm> scms;
  std::vector<std::uint64_t> seeds;
  for (int n : {10, 20, 40})
    for (std::uint64_t i = 0; i < 10; ++i) {
      scms.push_back(gen_linear_scm(n, 1.5, 1000 * n + i));
      seeds.push_back(derive_seed(n, i));
    }
  std::vector<AlphaScore> scores;
  EXPECT_EQ(select_alpha(candidates, scms, 30000, seeds, &scores), 0.001);
  for (const auto& s : scores) RecordProperty("f1_at_" + std::to_string(s.alpha), std::to_string(s.mean_f1));
}

TEST(Polytree, TwoAcceptedPairs) {
  const auto fit = polytree_from_tests(3, table_tester({{{0, 1}, 0.4}, {{1, 2}, 0.5}}), 6, 1);
  EXPECT_EQ(fit.tree.dag().edges(), (std::vector<Edge>{{0, 1}, {1, 2}}));
  EXPECT_TRUE(fit.removed.empty());
  EXPECT_EQ(fit.training.size(), 6u);
}

TEST(Polytree, TriangleDropsLowestPValue) {
  const auto fit = polytree_from_tests(3, table_tester({{{0, 1}, 0.2}, {{1, 2}, 0.3}, {{0, 2}, 0.01}}), 6, 1);
  EXPECT_EQ(fit.removed, (std::vector<Edge>{{0, 2}}));
  EXPECT_EQ(fit.tree.dag().edges(), (std::vector<Edge>{{0, 1}, {1, 2}}));
}

TEST(Polytree, OppositeDirectionsFormACycle) {
  const auto fit = polytree_from_tests(2, table_tester({{{0, 1}, 0.2}, {{1, 0}, 0.6}}), 2, 1);
  EXPECT_EQ(fit.tree.dag().edges(), (std::vector<Edge>{{1, 0}}));
}

TEST(Polytree, TrainingErrorCountsContradictedLabels) {
  // a 4-cycle plus a chord, all accepted with distinct p-values
  std::map<Edge, double> acc{{{0, 1}, 0.5}, {{1, 2}, 0.6}, {{2, 3}, 0.7}, {{3, 0}, 0.1}, {{0, 2}, 0.2}};
  const auto fit = polytree_from_tests(4, table_tester(acc), 12, 3);
  EXPECT_TRUE(is_polytree(fit.tree.dag()));
  int wrong = 0;
  for (const auto& t : fit.training)
    wrong += q_anm_polytree(fit.tree, t.query) != t.outcome.value;
  EXPECT_EQ(static_cast<std::size_t>(wrong), fit.removed.size());
  EXPECT_EQ(fit.removed.size(), 2u);
}

TEST(Polytree, DeterministicAndWithoutReplacement) {
  const auto scm = gen_gam_scm(5, 1.5, 3);
  const auto d = sample(scm, 200, 4).dataset;
  const auto a = polytree_from_anm(d, 20, 0.05, 9);
  const auto b = polytree_from_anm(d, 20, 0.05, 9);
  EXPECT_EQ(a.tree.dag(), b.tree.dag());
  std::set<Query> qs;
  for (const auto& t : a.training) qs.insert(t.query);
  EXPECT_EQ(qs.size(), 20u);
  EXPECT_THROW(polytree_from_anm(d, 21, 0.05, 9), Error);
}

TEST(PathFit, TwoVariables) {
  Eigen::MatrixXd cov(2, 2);
  cov << 1, -0.3, -0.3, 1;
  const Dataset d = sample_gaussian(cov, 5000, 3);
  const PathModel m = fit_path_model(d);
  EXPECT_EQ(m.n(), 2);
  EXPECT_NEAR(m.r()[0], pearson(d.column(0), d.column(1)), 1e-15);
}

TEST(PathFit, PlantedProductPrediction) {
  const Eigen::Index l = 10000;
  const Dataset d = sample_gaussian(chain_cov({0, 1, 2}, {0.5, 0.4}), l, 6);
  const PathModel m = fit_path_model(d);
  EXPECT_NEAR(path_corr_value(m, 0, 2), 0.2, 3.0 / std::sqrt(double(l)));
}

TEST(PathFit, RecoversOrderUpToReversal) {
  int ok = 0;
  for (std::uint64_t s = 0; s < 40; ++s) {
    std::vector<int> order{0, 1, 2, 3, 4};
    std::mt19937_64 rng(s);
    std::shuffle(order.begin(), order.end(), rng);
    const Dataset d = sample_gaussian(chain_cov(order, {0.8, -0.8, 0.8, 0.8}), 10000, s);
    auto got = fit_path_model(d).order();
    if (got != order) std::reverse(got.begin(), got.end());
    ok += got == order;
  }
  EXPECT_GE(ok, 38);
}

TEST(PathFit, ZeroCorrelation) {
  Eigen::MatrixXd m(4, 2);
  m << 1, 1, -1, 1, 1, -1, -1, -1;
  try {
    fit_path_model(Dataset(m, {0, 1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ZeroCorrelation);
  }
}
