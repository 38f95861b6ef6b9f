#pragma once

// End-to-end risk experiments: CI prediction with PC on linear-Gaussian data
// and ordered-pair ANM prediction with polytrees on additive tanh models.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "causalvc/bounds.hpp"
#include "causalvc/learners.hpp"

namespace causalvc {

enum class ExperimentKind { Ci, Anm };

inline std::string_view experiment_name(ExperimentKind k) { return k == ExperimentKind::Ci ? "ci" : "anm"; }

inline ExperimentKind parse_experiment(std::string_view s) {
  if (s == "ci") return ExperimentKind::Ci;
  if (s == "anm") return ExperimentKind::Anm;
  throw Error(Errc::ParseError, "unknown experiment '" + std::string(s) + "'");
}

/// Which CI queries count as the training set of the CI experiment.
enum class CiTrainingSet {
  /// The queries PC actually executed.
  Executed,
  /// A uniformly pre-sampled query set of size ks[0], independent of PC.
  Sampled,
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Ci;
  int n = 20;
  Eigen::Index l = 600;
  double alpha = 0.05;
  double expected_degree = 1.5;
  /// Training-set sizes (anm), or the sampled set size (ci, Sampled mode).
  std::vector<std::size_t> ks;
  int max_cond = 1;
  int datasets = 1;
  int repetitions = 20;
  std::uint64_t seed = 0;
  double eta = 0.1;
  /// Replace statistical tests by the ground truth (no label noise).
  bool oracle = false;
  CiTrainingSet ci_training = CiTrainingSet::Executed;
  ModelClass anm_bound_class = ModelClass::Polytrees;
  AnmConfig anm;
  GamConfig gam;
  /// Plot-only factors, stored with the records.
  double ci_rescale = 0.6;
  double anm_rescale = 0.2;
};

struct RiskRecord {
  ExperimentKind experiment;
  int n;
  Eigen::Index l;
  double alpha;
  std::size_t k;
  int rep;
  int dataset;
  double empirical;
  double expected;
  double gap;
  double bound_unscaled;
  double h;
  double eta;
  std::uint64_t seed;
  double rescale_factor;
  bool oracle;
  bool sampled_training;
};

/// Disagreement rate of `predict` against `test` over the whole universe.
template <typename Predict>
double expected_risk(Predict&& predict, std::span<const Query> universe, const Tester& test) {
  std::vector<PropertyValue> pred, truth;
  pred.reserve(universe.size());
  truth.reserve(universe.size());
  for (const auto& q : universe) {
    pred.push_back(predict(q));
    truth.push_back(test(q).value);
  }
  return empirical_error(pred, truth);
}

template <typename Predict>
double training_risk(Predict&& predict, std::span<const LabeledQuery> training) {
  std::vector<PropertyValue> pred, truth;
  for (const auto& t : training) {
    pred.push_back(predict(t.query));
    truth.push_back(t.outcome.value);
  }
  return empirical_error(pred, truth);
}

namespace detail {

inline void check_config(const ExperimentConfig& cfg) {
  if (cfg.n < 3) throw Error(Errc::InvalidN, "experiments need n >= 3");
  if (cfg.l < 20) throw Error(Errc::InvalidParams, "experiments need l >= 20");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw Error(Errc::InvalidParams, "alpha must lie in (0,1)");
  if (cfg.repetitions < 1 || cfg.datasets < 1) throw Error(Errc::InvalidParams, "repetitions and datasets must be >= 1");
}

}  // namespace detail

inline std::vector<RiskRecord> run_ci_experiment(const ExperimentConfig& cfg) {
  detail::check_config(cfg);
  if (cfg.experiment != ExperimentKind::Ci) throw Error(Errc::InvalidParams, "not a ci config");
  const double h = vc_upper_bound(ModelClass::AllDags, cfg.n);
  std::vector<Query> universe;
  for (int s = 0; s <= std::min(cfg.max_cond, cfg.n - 2); ++s) {
    auto part = enumerate_queries(cfg.n, QueryKind::CondIndep, s);
    universe.insert(universe.end(), part.begin(), part.end());
  }
  std::vector<RiskRecord> out;
  for (int ds = 0; ds < cfg.datasets; ++ds) {
    const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(ds));
    const LinearScm scm = gen_linear_scm(cfg.n, cfg.expected_degree, seed);
    Tester test;
    if (cfg.oracle) {
      const Dag truth = scm.dag();
      test = [truth](const Query& q) { return TestOutcome{q_ci_dag(truth, q), std::nullopt, std::nullopt, std::nullopt}; };
    } else {
      const ScmSample s = sample(scm, cfg.l, derive_seed(seed, 1));
      test = fisher_z_tester(s.dataset, cfg.alpha);
    }
    const PcResult pc = pc_fit(cfg.n, test, cfg.max_cond);
    const Dag model = random_dag_from_cpdag(pc.cpdag, derive_seed(seed, 2));
    auto predict = [&](const Query& q) { return q_ci_dag(model, q); };

    std::vector<LabeledQuery> training = pc.training;
    const bool sampled = cfg.ci_training == CiTrainingSet::Sampled;
    if (sampled) {
      const std::size_t k = cfg.ks.empty() ? pc.training.size() : cfg.ks.front();
      training.clear();
      for (const auto& q : sample_queries(universe, k, derive_seed(seed, 3))) training.push_back({q, test(q)});
    }
    const double emp = training_risk(predict, training);
    const double exp = expected_risk(predict, universe, test);
    const std::size_t k = training.size();
    out.push_back({ExperimentKind::Ci, cfg.n, cfg.l, cfg.alpha, k, ds, ds, emp, exp, std::abs(emp - exp),
                   gap_binary(h, k, cfg.eta), h, cfg.eta, seed, cfg.ci_rescale, cfg.oracle, sampled});
  }
  return out;
}

inline std::vector<RiskRecord> run_anm_experiment(const ExperimentConfig& cfg) {
  detail::check_config(cfg);
  if (cfg.experiment != ExperimentKind::Anm) throw Error(Errc::InvalidParams, "not an anm config");
  const double h = vc_upper_bound(cfg.anm_bound_class, cfg.n);
  const auto universe = enumerate_queries(cfg.n, QueryKind::OrderedPair);
  std::vector<std::size_t> ks = cfg.ks;
  if (ks.empty()) ks.push_back(universe.size());
  for (auto k : ks)
    if (k < 1 || k > universe.size()) throw Error(Errc::KTooLarge, "k must lie in 1..n(n-1)");

  std::vector<RiskRecord> out;
  for (int ds = 0; ds < cfg.datasets; ++ds) {
    const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(ds));
    const GamScm scm = gen_gam_scm(cfg.n, cfg.expected_degree, seed, cfg.gam);
    Tester test;
    if (cfg.oracle) {
      const Polytree truth(scm.dag);
      test = [truth](const Query& q) { return TestOutcome{q_anm_polytree(truth, q), 1.0, std::nullopt, std::nullopt}; };
    } else {
      const ScmSample s = sample(scm, cfg.l, derive_seed(seed, 1));
      test = anm_tester(s.dataset, cfg.alpha, cfg.anm);
    }
    for (std::size_t k : ks)
      for (int rep = 0; rep < cfg.repetitions; ++rep) {
        const std::uint64_t rep_seed = derive_seed(seed, 1000 + k * 10007 + static_cast<std::uint64_t>(rep));
        const PolytreeFit fit = polytree_from_tests(cfg.n, test, k, rep_seed);
        auto predict = [&](const Query& q) { return q_anm_polytree(fit.tree, q); };
        const double emp = training_risk(predict, fit.training);
        const double exp = expected_risk(predict, universe, test);
        out.push_back({ExperimentKind::Anm, cfg.n, cfg.l, cfg.alpha, k, rep, ds, emp, exp, std::abs(emp - exp),
                       gap_binary(h, k, cfg.eta), h, cfg.eta, rep_seed, cfg.anm_rescale, cfg.oracle, false});
      }
  }
  return out;
}

inline std::vector<RiskRecord> run_experiment(const ExperimentConfig& cfg) {
  return cfg.experiment == ExperimentKind::Ci ? run_ci_experiment(cfg) : run_anm_experiment(cfg);
}

/// Empirical quantile with linear interpolation between order statistics.
inline double quantile(std::vector<double> v, double p) {
  if (v.empty()) throw Error(Errc::InvalidSize, "quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct GapSummary {
  int n;
  std::size_t k;
  std::size_t count;
  double mean_gap;
  double q90_gap;
  double bound_unscaled;
};

/// Mean and 90% quantile of the gap per (n, k); CI records are pooled per n.
inline std::vector<GapSummary> summarize(std::span<const RiskRecord> records) {
  std::map<std::pair<int, std::size_t>, std::vector<const RiskRecord*>> groups;
  for (const auto& r : records) groups[{r.n, r.experiment == ExperimentKind::Ci ? 0 : r.k}].push_back(&r);
  std::vector<GapSummary> out;
  for (const auto& [key, rs] : groups) {
    std::vector<double> gaps;
    double bound = 0.0;
    for (const auto* r : rs) {
      gaps.push_back(r->gap);
      bound = std::max(bound, r->bound_unscaled);
    }
    double sum = 0.0;
    for (double g : gaps) sum += g;
    out.push_back({key.first, key.second, gaps.size(), sum / static_cast<double>(gaps.size()), quantile(gaps, 0.9), bound});
  }
  return out;
}

inline void write_report(std::ostream& out, std::span<const RiskRecord> records) {
  out << "experiment,n,l,alpha,k,rep,empirical,expected,gap,bound_unscaled,seed\n";
  out.precision(17);
  for (const auto& r : records) {
    out << experiment_name(r.experiment) << ',' << r.n << ',' << r.l << ',' << r.alpha << ',' << r.k << ',' << r.rep
        << ',' << r.empirical << ',' << r.expected << ',' << r.gap << ',' << r.bound_unscaled << ',' << r.seed << '\n';
  }
}

}  // namespace causalvc
