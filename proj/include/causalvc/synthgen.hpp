#pragma once

// Ground-truth structural causal models: linear-Gaussian SCMs on random DAGs
// and generalized additive SCMs (tanh networks, uniform noise) on random
// polytrees.

#include <algorithm>
#include <map>
#include <numeric>
#include <vector>

#include "causalvc/graph.hpp"

namespace causalvc {

struct LinearScm {
  int n = 0;
  /// order[p] is the node at causal position p.
  std::vector<int> order;
  /// coeffs(child, parent); nonzero only for parent earlier in `order`.
  Eigen::MatrixXd coeffs;

  Dag dag() const {
    std::vector<Edge> e;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        if (coeffs(i, j) != 0.0) e.emplace_back(j, i);
    return Dag(n, e);
  }
};

/// x -> sum_h w2[h] * tanh(w1[h] * x + b[h])
struct TanhMechanism {
  std::vector<double> w1, b, w2;

  double operator()(double x) const {
    double y = 0.0;
    for (std::size_t h = 0; h < w1.size(); ++h) y += w2[h] * std::tanh(w1[h] * x + b[h]);
    return y;
  }
};

struct GamConfig {
  int hidden = 20;
  double weight_lo = 0.1;
  double weight_hi = 1.0;
  double bias_lo = -1.0;
  double bias_hi = 1.0;
  /// Noise is uniform on [-noise_half_width, noise_half_width].
  double noise_half_width = 0.5;
  /// Flip the sign of each output weight with probability 1/2.
  bool random_output_sign = false;
};

struct GamScm {
  int n = 0;
  std::vector<int> order;
  Dag dag;
  std::map<Edge, TanhMechanism> mechanisms;
  GamConfig config;
};

struct ScmSample {
  Dataset dataset;
  Dag truth;
};

namespace detail {

inline std::vector<int> random_order(int n, Rng& rng) {
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

inline double edge_probability(int n, double expected_degree) {
  if (n < 2) throw Error(Errc::InvalidN, "n must be >= 2");
  if (!(expected_degree > 0.0) || expected_degree > n - 1) {
    throw Error(Errc::InvalidDegree, "expected degree must lie in (0, n-1]");
  }
  return expected_degree / (n - 1);
}

}  // namespace detail

/// Random causal order; each forward pair gets an edge with probability
/// expected_degree / (n - 1) and a coefficient uniform on [0.1, 1).
inline LinearScm gen_linear_scm(int n, double expected_degree, std::uint64_t seed) {
  const double p = detail::edge_probability(n, expected_degree);
  Rng rng = make_rng(seed);
  LinearScm scm;
  scm.n = n;
  scm.order = detail::random_order(n, rng);
  scm.coeffs = Eigen::MatrixXd::Zero(n, n);
  std::bernoulli_distribution edge(p);
  for (int pi = 0; pi < n; ++pi)
    for (int pj = pi + 1; pj < n; ++pj)
      if (edge(rng)) scm.coeffs(scm.order[pj], scm.order[pi]) = uniform(rng, 0.1, 1.0);
  return scm;
}

inline TanhMechanism random_mechanism(Rng& rng, const GamConfig& cfg) {
  TanhMechanism m;
  const auto h = static_cast<std::size_t>(cfg.hidden);
  m.w1.resize(h);
  m.b.resize(h);
  m.w2.resize(h);
  for (std::size_t i = 0; i < h; ++i) {
    m.w1[i] = uniform(rng, cfg.weight_lo, cfg.weight_hi);
    m.b[i] = uniform(rng, cfg.bias_lo, cfg.bias_hi);
    m.w2[i] = uniform(rng, cfg.weight_lo, cfg.weight_hi);
    if (cfg.random_output_sign && std::bernoulli_distribution(0.5)(rng)) m.w2[i] = -m.w2[i];
  }
  return m;
}

/// Generalized additive SCM with fresh random mechanisms on a given polytree.
inline GamScm gam_scm_on(const Dag& g, std::uint64_t seed, const GamConfig& cfg = {}) {
  if (!g.skeleton_is_forest()) throw Error(Errc::InvalidModel, "GAM models require a polytree");
  GamScm scm;
  scm.n = g.n();
  scm.order = g.topological_order();
  scm.dag = g;
  scm.config = cfg;
  Rng rng = make_rng(seed, 1);
  for (const auto& e : g.edges()) scm.mechanisms.emplace(e, random_mechanism(rng, cfg));
  return scm;
}

/// Edges proposed as in gen_linear_scm, in (position, position) lexicographic
/// order, and rejected when they would close an undirected cycle.
inline GamScm gen_gam_scm(int n, double expected_degree, std::uint64_t seed, const GamConfig& cfg = {}) {
  const double p = detail::edge_probability(n, expected_degree);
  Rng rng = make_rng(seed);
  const auto order = detail::random_order(n, rng);
  std::bernoulli_distribution edge(p);
  detail::DisjointSets forest(n);
  std::vector<Edge> edges;
  for (int pi = 0; pi < n; ++pi)
    for (int pj = pi + 1; pj < n; ++pj) {
      const bool proposed = edge(rng);
      if (proposed && forest.unite(order[pi], order[pj])) edges.emplace_back(order[pi], order[pj]);
    }
  GamScm scm = gam_scm_on(Dag(n, edges), seed, cfg);
  scm.order = order;
  return scm;
}

/// l i.i.d. rows, x_i = n_i + sum_j coeffs(i, j) x_j with standard normal noise.
inline ScmSample sample(const LinearScm& scm, Eigen::Index l, std::uint64_t seed) {
  if (l < 1) throw Error(Errc::InvalidParams, "sample size must be >= 1");
  Rng rng = make_rng(seed, 2);
  std::normal_distribution<double> noise(0.0, 1.0);
  Eigen::MatrixXd x(l, scm.n);
  for (Eigen::Index r = 0; r < l; ++r)
    for (int v : scm.order) {
      double val = noise(rng);
      for (int j = 0; j < scm.n; ++j)
        if (scm.coeffs(v, j) != 0.0) val += scm.coeffs(v, j) * x(r, j);
      x(r, v) = val;
    }
  std::vector<VariableId> cols(static_cast<std::size_t>(scm.n));
  std::iota(cols.begin(), cols.end(), 0);
  return {Dataset(std::move(x), std::move(cols)), scm.dag()};
}

/// Same, plus the noise draws (rows x n) for residual checks.
inline ScmSample sample(const GamScm& scm, Eigen::Index l, std::uint64_t seed, Eigen::MatrixXd* noise_out = nullptr) {
  if (l < 1) throw Error(Errc::InvalidParams, "sample size must be >= 1");
  Rng rng = make_rng(seed, 2);
  const double w = scm.config.noise_half_width;
  std::uniform_real_distribution<double> noise(-w, w);
  Eigen::MatrixXd x(l, scm.n);
  if (noise_out) noise_out->resize(l, scm.n);
  for (Eigen::Index r = 0; r < l; ++r)
    for (int v : scm.order) {
      const double nv = noise(rng);
      double val = nv;
      for (int p : scm.dag.parents(v)) val += scm.mechanisms.at({p, v})(x(r, p));
      x(r, v) = val;
      if (noise_out) (*noise_out)(r, v) = nv;
    }
  std::vector<VariableId> cols(static_cast<std::size_t>(scm.n));
  std::iota(cols.begin(), cols.end(), 0);
  return {Dataset(std::move(x), std::move(cols)), scm.dag};
}

/// Exact covariance (I - A)^{-1} (I - A)^{-T} of the linear SCM.
inline Eigen::MatrixXd population_covariance(const LinearScm& scm) {
  const Eigen::MatrixXd ia = Eigen::MatrixXd::Identity(scm.n, scm.n) - scm.coeffs;
  const Eigen::MatrixXd inv = ia.inverse();
  return inv * inv.transpose();
}

/// l draws from N(0, cov). Uses LDLT so singular PSD covariances work.
inline Dataset sample_gaussian(const Eigen::MatrixXd& cov, Eigen::Index l, std::uint64_t seed,
                               std::vector<VariableId> columns = {}) {
  const Eigen::Index k = cov.rows();
  if (columns.empty()) {
    columns.resize(static_cast<std::size_t>(k));
    std::iota(columns.begin(), columns.end(), 0);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.eigenvalues().minCoeff() < -1e-9) throw Error(Errc::NonPsdInput, "covariance is not PSD");
  const Eigen::MatrixXd root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  Rng rng = make_rng(seed, 3);
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd e(l, k);
  for (Eigen::Index r = 0; r < l; ++r)
    for (Eigen::Index c = 0; c < k; ++c) e(r, c) = z(rng);
  return Dataset(e * root.transpose(), std::move(columns));
}

}  // namespace causalvc
