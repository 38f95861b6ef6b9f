// Acceptance suite. Each criterion prints one PASS/FAIL line; pass a
// criterion number to run just that one. Tolerances are fixed below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "causalvc/causalvc.hpp"
#include "oracles.hpp"

using namespace causalvc;

namespace {

constexpr double kGapBinaryTarget = 0.5196;
constexpr double kGapBinaryTol = 0.001;
constexpr double kCalibrationTol = 0.03;
constexpr double kCiMeanSlack = 0.02;
constexpr double kAnmMeanSlack = 0.03;
constexpr double kPathTruncation = 0.05;

// unit-variance chain: cov of two nodes is the product of the r's between them
Eigen::MatrixXd population_covariance_of_chain(const std::vector<int>& order, const std::vector<double>& r) {
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

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Verdict c1_dseparation() {
  std::mt19937_64 rng(101);
  long checked = 0, disagree = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int t = 0; t < 200; ++t) {
    const int n = 2 + t % 5;
    const Dag g = oracle::random_dag(n, 0.45, rng);
    for (int s = 0; s <= std::min(2, n - 2); ++s)
      for (const auto& q : enumerate_queries(n, QueryKind::CondIndep, s)) {
        ++checked;
        const std::vector<int> cond(q.conditioning().begin(), q.conditioning().end());
        disagree += d_separated(g, q) != oracle::d_separated_moral(g, q.first(), q.second(), cond);
      }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {disagree == 0 && secs < 10.0, fmt("%ld disagreements over %ld queries, %.2f s", disagree, checked, secs)};
}

Verdict c2_vc_dimensions() {
  bool ok = true;
  std::string detail;
  for (auto c : {ModelClass::AllDags, ModelClass::Polytrees, ModelClass::PathSign, ModelClass::Directionality})
    for (int n = 2; n <= 4; ++n) {
      const auto count = brute_force_vc_check(c, n);
      const double h = vc_upper_bound(c, n);
      if (std::log2(static_cast<double>(count)) > h) {
        ok = false;
        detail += fmt("%s n=%d: log2(%llu)=%.3f > %.3f; ", std::string(model_class_name(c)).c_str(), n,
                      static_cast<unsigned long long>(count), std::log2(static_cast<double>(count)), h);
      }
    }
  for (int n = 2; n <= 5; ++n) {
    const std::uint64_t cap = (std::uint64_t{1} << (n - 1)) - static_cast<std::uint64_t>(n) + 1;
    for (auto per_tree : polytree_classes_per_tree(n))
      if (per_tree > cap) {
        ok = false;
        detail += fmt("polytree classes %llu > %llu at n=%d; ", static_cast<unsigned long long>(per_tree),
                      static_cast<unsigned long long>(cap), n);
      }
  }
  if (ok) detail = "all counts within the closed-form dimensions";
  else detail.resize(detail.size() - 2);
  return {ok, detail};
}

Verdict c3_sample_complexity() {
  const auto t0 = std::chrono::steady_clock::now();
  int crossing = -1;
  for (int n = 3; n <= 1000 && crossing < 0; ++n)
    if (min_training_sets(ModelClass::Polytrees, n, 0.1, 0.1) <= count_queries(n, QueryKind::CondIndep, 1)) crossing = n;
  const double ratio = static_cast<double>(min_training_sets(ModelClass::Polytrees, 100, 0.1, 0.1)) /
                       static_cast<double>(count_queries(100, QueryKind::CondIndep, 1));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = crossing >= 40 && crossing <= 60 && ratio < 0.3 && secs < 1.0;
  return {ok, fmt("crossing at n=%d, ratio at n=100 is %.4f, %.3f s", crossing, ratio, secs)};
}

Verdict c4_gap_numerics() {
  // independent evaluation of the bracket
  const double h = 10, k = 1000, eta = 0.1;
  const double hand = 2.0 * std::sqrt((h * (std::log(2.0 * k / h) + 1.0) - std::log(eta / 9.0)) / k);
  const double got = gap_binary(10, 1000, 0.1);
  bool mono = true;
  for (double hh : {2.0, 10.0, 50.0})
    for (double e : {0.01, 0.1, 0.3})
      for (std::uint64_t kk = 100; kk < 10000000; kk *= 3) {
        const double g = gap_binary(hh, kk, e);
        if (g < 1.0 && !(gap_binary(hh, kk * 2, e) < g)) mono = false;
        if (g < 1.0 && !(gap_binary(hh, kk, e / 2) > g)) mono = false;
        if (g < 1.0 && !(gap_binary(hh * 1.5, kk, e) > g)) mono = false;
      }
  const bool ok = std::abs(got - kGapBinaryTarget) <= kGapBinaryTol && std::abs(got - hand) < 1e-12 && mono;
  return {ok, fmt("gap_binary(10,1000,0.1)=%.6f, hand %.6f, monotone grid %s", got, hand, mono ? "ok" : "violated")};
}

Verdict c5_ci_experiment() {
  const auto t0 = std::chrono::steady_clock::now();
  std::map<int, double> mean_gap;
  int violations = 0, records = 0;
  for (int n : {10, 20}) {
    ExperimentConfig cfg;
    cfg.experiment = ExperimentKind::Ci;
    cfg.n = n;
    cfg.l = 10000;
    cfg.alpha = 0.001;
    cfg.datasets = 20;
    cfg.seed = 500 + static_cast<std::uint64_t>(n);
    double sum = 0;
    const auto recs = run_ci_experiment(cfg);
    for (const auto& r : recs) {
      const double bound = gap_binary(vc_upper_bound(ModelClass::AllDags, n), r.k, r.eta);
      violations += r.gap > bound;
      sum += r.gap;
      ++records;
    }
    mean_gap[n] = sum / static_cast<double>(recs.size());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = violations == 0 && mean_gap[20] <= mean_gap[10] + kCiMeanSlack && secs < 900;
  return {ok, fmt("%d/%d gaps above bound, mean gap n=10 %.4f, n=20 %.4f, %.1f s", violations, records, mean_gap[10],
                  mean_gap[20], secs)};
}

Verdict c6_anm_experiment() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg;
  cfg.experiment = ExperimentKind::Anm;
  cfg.n = 10;
  cfg.l = 600;
  cfg.alpha = 0.05;
  cfg.ks = {10, 30, 60, 90};
  cfg.datasets = 3;
  cfg.repetitions = 20;
  cfg.seed = 600;
  const auto recs = run_anm_experiment(cfg);
  std::map<std::size_t, GapSummary> by_k;
  for (const auto& s : summarize(recs)) by_k[s.k] = s;
  bool quantiles_ok = true;
  for (const auto& [k, s] : by_k)
    if (s.q90_gap > gap_binary(vc_upper_bound(cfg.anm_bound_class, cfg.n), k, cfg.eta)) quantiles_ok = false;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = by_k[90].mean_gap == 0.0 && by_k[60].mean_gap <= by_k[10].mean_gap + kAnmMeanSlack && quantiles_ok &&
                  secs < 1800;
  return {ok, fmt("mean gap k=10 %.4f, k=30 %.4f, k=60 %.4f, k=90 %.4f; q90 within bound %s; %.1f s", by_k[10].mean_gap,
                  by_k[30].mean_gap, by_k[60].mean_gap, by_k[90].mean_gap, quantiles_ok ? "yes" : "no", secs)};
}

Verdict c7_anm_chain() {
  const Dag chain(3, {{0, 1}, {1, 2}});
  int xy = 0, yz = 0, xz = 0;
  const int seeds = 50;
  for (int s = 0; s < seeds; ++s) {
    const auto scm = gam_scm_on(chain, derive_seed(700, s));
    const Dataset d = sample(scm, 600, derive_seed(701, s)).dataset;
    auto accepted = [&](int a, int b) {
      return std::get<Binary>(anm_test(d, Query::ordered_pair(a, b), 0.05).value).value == 1;
    };
    xy += accepted(0, 1);
    yz += accepted(1, 2);
    xz += accepted(0, 2);
  }
  const bool ok = xy >= 45 && yz >= 45 && xz <= 5;
  return {ok, fmt("accepted X->Y %d/50, Y->Z %d/50, X->Z %d/50", xy, yz, xz)};
}

Verdict c8_calibration() {
  const double alpha = 0.05;
  int fz = 0;
  for (int t = 0; t < 2000; ++t) {
    const Dataset d = sample_gaussian(Eigen::MatrixXd::Identity(3, 3), 200, derive_seed(800, t));
    fz += std::get<Binary>(fisher_z_ci(d, Query::cond_indep(0, 1, {2}), alpha).value).value == 0;
  }
  int hs = 0;
  for (int t = 0; t < 500; ++t) {
    const Dataset d = sample_gaussian(Eigen::MatrixXd::Identity(2, 2), 100, derive_seed(801, t));
    hs += std::get<Binary>(hsic_independence(d.column(0), d.column(1), alpha).value).value == 0;
  }
  const double rf = fz / 2000.0, rh = hs / 500.0;
  const bool ok = std::abs(rf - alpha) <= kCalibrationTol && std::abs(rh - alpha) <= kCalibrationTol;
  return {ok, fmt("false rejections: Fisher-Z %.4f, HSIC %.4f at alpha %.2f", rf, rh, alpha)};
}

Verdict c9_gluing() {
  Eigen::Matrix2d xy, yz;
  xy << 1, 0.5, 0.5, 1;
  yz << 1, 0.4, 0.4, 1;
  const Eigen::Matrix3d g = glue_gaussian_chain(xy, yz);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(g);
  const bool exact = g(0, 2) == 0.2 && g(2, 0) == 0.2 && g.block<2, 2>(0, 0) == xy && g.block<2, 2>(1, 1) == yz;
  const bool psd = eig.eigenvalues().minCoeff() >= 0.0;
  int accepted = 0;
  const int seeds = 100;
  for (int s = 0; s < seeds; ++s) {
    const Dataset d = sample_gaussian(g, 100000, derive_seed(900, s));
    accepted += std::get<Binary>(fisher_z_ci(d, Query::cond_indep(0, 2, {1}), 0.01).value).value;
  }
  const bool ok = exact && psd && accepted >= 95;
  return {ok, fmt("cov(X,Z)=%.17g, marginals exact %s, min eigenvalue %.4f, CI accepted %d/%d", g(0, 2),
                  exact ? "yes" : "no", eig.eigenvalues().minCoeff(), accepted, seeds)};
}

Verdict c10_path_predictor() {
  const int n = 6;
  const Eigen::Index l = 10000;
  const double tol = 3.0 / std::sqrt(static_cast<double>(l)) + kPathTruncation;
  int recovered = 0, worst_pairs = 0;
  double worst = 0.0;
  for (int s = 0; s < 100; ++s) {
    std::mt19937_64 rng(derive_seed(1000, s));
    std::vector<int> order{0, 1, 2, 3, 4, 5};
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<double> r(n - 1);
    std::uniform_real_distribution<double> mag(0.7, 0.95);
    std::bernoulli_distribution flip(0.5);
    for (auto& x : r) x = flip(rng) ? -mag(rng) : mag(rng);
    const Eigen::MatrixXd cov = population_covariance_of_chain(order, r);
    const Dataset d = sample_gaussian(cov, l, derive_seed(1001, s));
    const PathModel m = fit_path_model(d);
    auto got = m.order();
    if (got != order) std::reverse(got.begin(), got.end());
    recovered += got == order;
    const auto pos = [&](int v) { return std::find(order.begin(), order.end(), v) - order.begin(); };
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        if (std::abs(pos(a) - pos(b)) < 2) continue;
        const double dev = std::abs(path_corr_value(m, a, b) - pearson(d.column(a), d.column(b)));
        worst = std::max(worst, dev);
        worst_pairs += dev >= tol;
      }
  }
  const bool ok = recovered >= 95 && worst_pairs == 0;
  return {ok, fmt("order recovered %d/100, worst non-adjacent deviation %.4f (limit %.4f), %d over", recovered, worst, tol,
                  worst_pairs)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"d-separation oracle equivalence", c1_dseparation},
      {"VC dimension brute-force checks", c2_vc_dimensions},
      {"sample complexity crossing", c3_sample_complexity},
      {"generalization gap numerics", c4_gap_numerics},
      {"CI experiment gaps", c5_ci_experiment},
      {"ANM experiment gaps", c6_anm_experiment},
      {"ANM on nonlinear chains", c7_anm_chain},
      {"test calibration", c8_calibration},
      {"Gaussian chain gluing", c9_gluing},
      {"path predictor", c10_path_predictor},
  };
  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);
  if (only < 0 || only > static_cast<int>(criteria.size())) {
    std::fprintf(stderr, "usage: %s [criterion 1..%zu]\n", argv[0], criteria.size());
    return 2;
  }
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && static_cast<int>(i) + 1 != only) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s C%zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
    failed += !v.pass;
  }
  return failed ? 1 : 0;
}
