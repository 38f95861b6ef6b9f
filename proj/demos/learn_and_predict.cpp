// Learn a CPDAG from part of the CI tests, then answer the untested ones.
#include <cstdio>

#include "causalvc/causalvc.hpp"

using namespace causalvc;

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::stoull(argv[1]) : 1;
  const int n = 10;
  const auto scm = gen_linear_scm(n, 1.5, seed);
  const Dataset d = sample(scm, 20000, derive_seed(seed, 1)).dataset;
  const auto fit = pc_fit(d, 0.001, 1);
  const Dag g = random_dag_from_cpdag(fit.cpdag, derive_seed(seed, 2));

  const auto predict = [&](const Query& q) { return q_ci_dag(g, q); };
  const Tester test = fisher_z_tester(d, 0.001);
  std::vector<Query> universe = enumerate_queries(n, QueryKind::CondIndep, 0);
  const auto one = enumerate_queries(n, QueryKind::CondIndep, 1);
  universe.insert(universe.end(), one.begin(), one.end());

  std::set<Query> seen;
  for (const auto& t : fit.training) seen.insert(t.query);
  std::vector<Query> unseen;
  for (const auto& q : universe)
    if (!seen.count(q)) unseen.push_back(q);

  std::printf("true edges %zu, learned directed %zu undirected %zu\n", scm.dag().edge_count(),
              fit.cpdag.directed().size(), fit.cpdag.undirected().size());
  std::printf("tests run by PC: %zu of %zu\n", fit.training.size(), universe.size());
  std::printf("training error        %.4f\n", training_risk(predict, fit.training));
  std::printf("error on untested CIs %.4f\n", expected_risk(predict, unseen, test));
  std::printf("error on all CIs      %.4f\n", expected_risk(predict, universe, test));
  std::printf("bound on the gap      %.4f\n",
              gap_binary(vc_upper_bound(ModelClass::AllDags, n), fit.training.size(), 0.1));
}
