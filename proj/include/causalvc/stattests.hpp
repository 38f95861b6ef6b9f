#pragma once

// Statistical tests and estimators producing the labels that causal models
// are asked to predict: Fisher-Z partial correlation tests, Pearson
// correlation/sign, HSIC with the gamma approximation, kernel ridge
// regression and the bivariate additive-noise-model test.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "causalvc/core.hpp"

namespace causalvc {

struct TestOutcome {
  PropertyValue value;
  /// Absent for pure estimators.
  std::optional<double> p_value;
  std::optional<double> alpha;
  /// ANM test only: p-value of the marginal dependence check.
  std::optional<double> dependence_p_value;
};

/// Any function producing a labelled outcome for a query; lets learners run
/// on real tests, cached tests or population oracles alike.
using Tester = std::function<TestOutcome(const Query&)>;

namespace detail {

inline constexpr double kMinVariance = 1e-12;
inline constexpr double kSingularity = 1e-12;

// Index-order accumulation so every code path produces identical bits.
inline double dot(const double* a, const double* b, Eigen::Index n) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

inline double mean(const Eigen::VectorXd& x) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += x[i];
  return s / static_cast<double>(x.size());
}

inline Eigen::VectorXd centered(const Eigen::VectorXd& x) {
  const double m = mean(x);
  Eigen::VectorXd c(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) c[i] = x[i] - m;
  return c;
}

inline void require_variance(const Eigen::VectorXd& centered_col, const char* what) {
  const double ss = dot(centered_col.data(), centered_col.data(), centered_col.size());
  if (!(ss / static_cast<double>(std::max<Eigen::Index>(centered_col.size() - 1, 1)) >= kMinVariance)) {
    throw Error(Errc::DegenerateInput, std::string(what) + " is constant");
  }
}

inline double std_normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

}  // namespace detail

/// Pearson correlations of all columns, computed pairwise in index order.
class CorrelationMatrix {
 public:
  explicit CorrelationMatrix(const Dataset& d) : rows_(d.rows()), ids_(d.columns()) {
    const auto k = static_cast<Eigen::Index>(d.width());
    std::vector<Eigen::VectorXd> c;
    std::vector<double> ss;
    c.reserve(static_cast<std::size_t>(k));
    for (Eigen::Index j = 0; j < k; ++j) {
      c.push_back(detail::centered(d.samples().col(j)));
      ss.push_back(detail::dot(c.back().data(), c.back().data(), rows_));
      if (!(ss.back() / static_cast<double>(std::max<Eigen::Index>(rows_ - 1, 1)) >= detail::kMinVariance)) {
        constant_.push_back(ids_[static_cast<std::size_t>(j)]);
      }
    }
    r_ = Eigen::MatrixXd::Identity(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
      for (Eigen::Index b = a + 1; b < k; ++b) {
        const double v = detail::dot(c[a].data(), c[b].data(), rows_) / std::sqrt(ss[a] * ss[b]);
        r_(a, b) = r_(b, a) = v;
      }
    for (std::size_t j = 0; j < ids_.size(); ++j) pos_.emplace(ids_[j], static_cast<Eigen::Index>(j));
  }

  Eigen::Index rows() const { return rows_; }

  bool is_constant(VariableId id) const { return std::find(constant_.begin(), constant_.end(), id) != constant_.end(); }

  Eigen::Index index_of(VariableId id) const {
    auto it = pos_.find(id);
    if (it == pos_.end()) throw Error(Errc::MissingVariable, "variable " + std::to_string(id));
    return it->second;
  }

  double operator()(VariableId a, VariableId b) const { return r_(index_of(a), index_of(b)); }

  /// Submatrix over `ids` in the given order.
  Eigen::MatrixXd sub(std::span<const VariableId> ids) const {
    const auto m = static_cast<Eigen::Index>(ids.size());
    Eigen::MatrixXd s(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) s(i, j) = r_(index_of(ids[i]), index_of(ids[j]));
    return s;
  }

 private:
  Eigen::Index rows_;
  std::vector<VariableId> ids_;
  std::vector<VariableId> constant_;
  std::unordered_map<VariableId, Eigen::Index> pos_;
  Eigen::MatrixXd r_;
};

/// Partial correlation of the first two variables of `r` given the rest, by
/// inversion of the correlation submatrix.
inline double partial_correlation(const Eigen::MatrixXd& r) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r, Eigen::EigenvaluesOnly);
  const auto ev = es.eigenvalues();
  if (!(ev.minCoeff() > detail::kSingularity * std::max(1.0, ev.maxCoeff()))) {
    throw Error(Errc::DegenerateInput, "correlation submatrix is singular");
  }
  double pc = 0.0;
  if (r.rows() == 2) {
    pc = r(0, 1);
  } else {
    const Eigen::MatrixXd p = r.inverse();
    pc = -p(0, 1) / std::sqrt(p(0, 0) * p(1, 1));
  }
  if (!(std::abs(pc) < 1.0)) throw Error(Errc::DegenerateInput, "partial correlation is +-1");
  return pc;
}

/// Fisher-Z test of y1 _||_ y2 | cond from a precomputed correlation matrix.
inline TestOutcome fisher_z_ci(const CorrelationMatrix& corr, const Query& q, double alpha) {
  if (q.kind() != QueryKind::CondIndep) throw Error(Errc::TagMismatch, "Fisher-Z needs a CondIndep query");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::InvalidParams, "alpha must lie in (0,1)");
  const auto cond = static_cast<Eigen::Index>(q.conditioning().size());
  const Eigen::Index l = corr.rows();
  if (l <= cond + 3) throw Error(Errc::InvalidParams, "need more than |cond|+3 samples");
  for (VariableId v : q.members())
    if (corr.is_constant(v)) throw Error(Errc::DegenerateInput, "variable " + std::to_string(v) + " is constant");
  const double r = partial_correlation(corr.sub(q.members()));
  const double z = std::sqrt(static_cast<double>(l - cond - 3)) * 0.5 * std::log((1.0 + r) / (1.0 - r));
  const double p = detail::std_normal_two_sided_p(z);
  return {Binary{p > alpha ? 1 : 0}, p, alpha, std::nullopt};
}

inline TestOutcome fisher_z_ci(const Dataset& d, const Query& q, double alpha) {
  return fisher_z_ci(CorrelationMatrix(project(d, q)), q, alpha);
}

/// Fisher-Z tester sharing one correlation matrix across queries.
inline Tester fisher_z_tester(const Dataset& d, double alpha) {
  auto corr = std::make_shared<const CorrelationMatrix>(d);
  return [corr, alpha](const Query& q) { return fisher_z_ci(*corr, q, alpha); };
}

inline double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size()) throw Error(Errc::LengthMismatch, "columns differ in length");
  if (x.size() < 3) throw Error(Errc::InvalidParams, "need at least 3 samples");
  const auto cx = detail::centered(x);
  const auto cy = detail::centered(y);
  detail::require_variance(cx, "first column");
  detail::require_variance(cy, "second column");
  const double sxy = detail::dot(cx.data(), cy.data(), cx.size());
  const double sxx = detail::dot(cx.data(), cx.data(), cx.size());
  const double syy = detail::dot(cy.data(), cy.data(), cy.size());
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline TestOutcome corr_estimate(const Dataset& d, const Query& q) {
  if (q.kind() != QueryKind::UnorderedPair) throw Error(Errc::TagMismatch, "correlation needs an UnorderedPair query");
  return {Real{pearson(d.column(q.first()), d.column(q.second()))}, std::nullopt, std::nullopt, std::nullopt};
}

inline TestOutcome sign_estimate(const Dataset& d, const Query& q) {
  if (q.kind() != QueryKind::UnorderedPair) throw Error(Errc::TagMismatch, "sign needs an UnorderedPair query");
  const double r = pearson(d.column(q.first()), d.column(q.second()));
  if (std::abs(r) <= 1e-12) throw Error(Errc::ZeroCorrelation, "correlation is zero");
  return {Sign{r > 0 ? 1 : -1}, std::nullopt, std::nullopt, std::nullopt};
}

// ---------------------------------------------------------------------------
// Kernel methods

namespace detail {

/// Squared-distance median over distinct pairs (median heuristic).
inline double median_sq_distance(const Eigen::VectorXd& x) {
  const Eigen::Index m = x.size();
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(m * (m - 1) / 2));
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const double v = (x[i] - x[j]) * (x[i] - x[j]);
      if (v > 0) d.push_back(v);
    }
  if (d.empty()) throw Error(Errc::DegenerateInput, "column is constant");
  auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  double med = *mid;
  if (d.size() % 2 == 0) med = 0.5 * (med + *std::max_element(d.begin(), mid));
  return med;
}

/// Gaussian Gram matrix exp(-|xi - xj|^2 / median) .
inline Eigen::MatrixXd gaussian_gram(const Eigen::VectorXd& x) {
  const double width = median_sq_distance(x);
  const Eigen::Index m = x.size();
  Eigen::MatrixXd k(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    k(j, j) = 1.0;
    for (Eigen::Index i = j + 1; i < m; ++i) k(i, j) = k(j, i) = std::exp(-(x[i] - x[j]) * (x[i] - x[j]) / width);
  }
  return k;
}

/// H K H with H = I - 11'/m.
inline Eigen::MatrixXd double_center(const Eigen::MatrixXd& k) {
  const Eigen::VectorXd row_mean = k.rowwise().mean();
  const double total = row_mean.mean();
  Eigen::MatrixXd c = k;
  c.colwise() -= row_mean;
  c.rowwise() -= row_mean.transpose();
  c.array() += total;
  return c;
}

}  // namespace detail

struct HsicConfig {
  /// Permutation p-values instead of the gamma approximation.
  bool permutation = false;
  int permutations = 500;
  std::uint64_t seed = 0;
};

/// HSIC independence test with Gaussian kernels (median heuristic). Binary
/// value 1 = independence accepted (p > alpha).
inline TestOutcome hsic_independence(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double alpha,
                                     const HsicConfig& cfg = {}) {
  if (x.size() != y.size()) throw Error(Errc::LengthMismatch, "columns differ in length");
  const Eigen::Index m = x.size();
  if (m < 20) throw Error(Errc::InvalidParams, "HSIC needs at least 20 samples");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::InvalidParams, "alpha must lie in (0,1)");
  detail::require_variance(detail::centered(x), "first column");
  detail::require_variance(detail::centered(y), "second column");

  const Eigen::MatrixXd k = detail::gaussian_gram(x);
  const Eigen::MatrixXd l = detail::gaussian_gram(y);
  const Eigen::MatrixXd kc = detail::double_center(k);
  const Eigen::MatrixXd lc = detail::double_center(l);
  const double md = static_cast<double>(m);
  const double stat = (kc.array() * lc.array()).sum() / md;

  double p = 1.0;
  if (cfg.permutation) {
    Rng rng = make_rng(cfg.seed, 4);
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(m));
    std::iota(perm.begin(), perm.end(), 0);
    int exceed = 0;
    for (int b = 0; b < cfg.permutations; ++b) {
      std::shuffle(perm.begin(), perm.end(), rng);
      double s = 0.0;
      for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index i = 0; i < m; ++i) s += kc(i, j) * lc(perm[i], perm[j]);
      if (s / md >= stat) ++exceed;
    }
    p = (1.0 + exceed) / (1.0 + cfg.permutations);
  } else {
    Eigen::ArrayXXd v = (kc.array() * lc.array() / 6.0).square();
    double var = (v.sum() - v.matrix().diagonal().sum()) / md / (md - 1.0);
    var *= 72.0 * (md - 4.0) * (md - 5.0) / md / (md - 1.0) / (md - 2.0) / (md - 3.0);
    const double mu_x = (k.sum() - k.diagonal().sum()) / md / (md - 1.0);
    const double mu_y = (l.sum() - l.diagonal().sum()) / md / (md - 1.0);
    const double mean = (1.0 + mu_x * mu_y - mu_x - mu_y) / md;
    if (!(var > 0.0) || !(mean > 0.0)) throw Error(Errc::DegenerateInput, "HSIC null moments degenerate");
    const double shape = mean * mean / var;
    const double scale = var * md / mean;
    p = stat <= 0.0 ? 1.0 : boost::math::gamma_q(shape, stat / scale);
  }
  return {Binary{p > alpha ? 1 : 0}, p, alpha, std::nullopt};
}

struct KrrConfig {
  /// Ridge penalty per sample: lambda = ridge_per_sample * l.
  double ridge_per_sample = 1e-3;
};

/// Residuals y - f(x) of kernel ridge regression with a Gaussian kernel
/// (median heuristic) and an unpenalized intercept.
inline Eigen::VectorXd kernel_regress(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const KrrConfig& cfg = {}) {
  if (x.size() != y.size()) throw Error(Errc::LengthMismatch, "columns differ in length");
  const Eigen::Index m = x.size();
  if (m < 20) throw Error(Errc::InvalidParams, "regression needs at least 20 samples");
  detail::require_variance(detail::centered(x), "regressor");
  const Eigen::VectorXd yc = detail::centered(y);
  Eigen::MatrixXd k = detail::gaussian_gram(x);
  Eigen::MatrixXd reg = k;
  reg.diagonal().array() += cfg.ridge_per_sample * static_cast<double>(m);
  const Eigen::VectorXd coef = reg.llt().solve(yc);
  return yc - k * coef;
}

struct AnmConfig {
  HsicConfig hsic;
  KrrConfig regression;
};

/// Bivariate additive-noise test for source -> target: 1 iff source and
/// target are dependent and the regression residual of target on source is
/// independent of source. p_value is the residual-independence p-value.
inline TestOutcome anm_test(const Eigen::VectorXd& source, const Eigen::VectorXd& target, double alpha,
                            const AnmConfig& cfg = {}) {
  const TestOutcome dep = hsic_independence(source, target, alpha, cfg.hsic);
  const Eigen::VectorXd resid = kernel_regress(source, target, cfg.regression);
  const TestOutcome res = hsic_independence(source, resid, alpha, cfg.hsic);
  const bool dependent = std::get<Binary>(dep.value).value == 0;
  const bool residual_independent = std::get<Binary>(res.value).value == 1;
  return {Binary{dependent && residual_independent ? 1 : 0}, res.p_value, alpha, dep.p_value};
}

inline TestOutcome anm_test(const Dataset& d, const Query& q, double alpha, const AnmConfig& cfg = {}) {
  if (q.kind() != QueryKind::OrderedPair) throw Error(Errc::TagMismatch, "ANM test needs an OrderedPair query");
  if (d.rows() < 20) throw Error(Errc::InvalidParams, "ANM test needs at least 20 samples");
  return anm_test(d.column(q.first()), d.column(q.second()), alpha, cfg);
}

/// ANM tester that memoizes outcomes per ordered pair.
inline Tester anm_tester(const Dataset& d, double alpha, const AnmConfig& cfg = {}) {
  struct State {
    Dataset data;
    double alpha;
    AnmConfig cfg;
    std::map<Query, TestOutcome> cache;
  };
  auto st = std::make_shared<State>(State{d, alpha, cfg, {}});
  return [st](const Query& q) {
    auto it = st->cache.find(q);
    if (it != st->cache.end()) return it->second;
    TestOutcome o = anm_test(st->data, q, st->alpha, st->cfg);
    st->cache.emplace(q, o);
    return o;
  };
}

}  // namespace causalvc
