// causalvc: generate data, run tests, fit and query causal models, and
// compute capacity-based generalization bounds.
//
// Exit codes: 0 success, 1 usage error, 2 data or model error. Errors are
// printed to stderr as {"error": <code>, "message": <text>}.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "causalvc/causalvc.hpp"

namespace cv = causalvc;

namespace {

constexpr const char* kSeedEnv = "CAUSALVC_SEED";

std::uint64_t default_seed() {
  if (const char* s = std::getenv(kSeedEnv)) {
    if (auto v = cv::detail::parse_int(s); v && *v >= 0) return static_cast<std::uint64_t>(*v);
  }
  return 0;
}

void print_json(const cv::Json& j, const std::string& out_path = {}) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(out_path);
  if (!f) throw cv::Error(cv::Errc::MissingFile, "cannot write " + out_path);
  f << j.dump(2) << '\n';
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw cv::Error(cv::Errc::MissingFile, "cannot write " + path);
  return f;
}

std::optional<cv::Universe> load_names(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return cv::universe_from_json(cv::read_json_file(path));
}

cv::TestOutcome run_test(const cv::Dataset& d, const cv::PropertyQuery& pq, double alpha) {
  using P = cv::Property;
  switch (pq.property) {
    case P::Ci: return cv::fisher_z_ci(d, pq.query, alpha);
    case P::Anm: return cv::anm_test(d, pq.query, alpha);
    case P::Corr: return cv::corr_estimate(d, pq.query);
    case P::Sign: return cv::sign_estimate(d, pq.query);
    default:
      throw cv::Error(cv::Errc::UnsupportedQueryForModel,
                      std::string("no statistical test for ") + std::string(cv::property_name(pq.property)) + " queries");
  }
}

void write_labels(const std::string& path, const std::vector<cv::LabeledQuery>& training, cv::Property property) {
  if (path.empty()) return;
  auto f = open_out(path);
  f << "query,outcome,p_value\n";
  for (const auto& t : training) {
    f << '"' << cv::format_query({property, t.query}) << "\"," << cv::value_text(t.outcome.value) << ',';
    if (t.outcome.p_value) f << cv::Json(*t.outcome.p_value).dump();
    f << '\n';
  }
}

cv::QueryKind planning_kind(cv::ModelClass c) {
  switch (c) {
    case cv::ModelClass::AllDags:
    case cv::ModelClass::Polytrees: return cv::QueryKind::CondIndep;
    case cv::ModelClass::Directionality: return cv::QueryKind::OrderedPair;
    default: return cv::QueryKind::UnorderedPair;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal models as predictors of statistical properties, with VC-type bounds"};
  app.require_subcommand(1);
  std::uint64_t seed = default_seed();
  app.add_option("--seed", seed, std::string("Global seed (default from ") + kSeedEnv + ", else 0)");

  // gen
  auto* gen = app.add_subcommand("gen", "Sample a random structural causal model");
  std::string gen_model = "linear", gen_out, gen_truth;
  int gen_n = 10;
  double gen_degree = 1.5, gen_noise = 0.5;
  Eigen::Index gen_l = 1000;
  gen->add_option("--model", gen_model, "linear or gam")->check(CLI::IsMember({"linear", "gam"}));
  gen->add_option("--n", gen_n, "Number of variables");
  gen->add_option("--degree", gen_degree, "Expected node degree");
  gen->add_option("--l", gen_l, "Number of samples");
  gen->add_option("--noise-width", gen_noise, "Half width of the uniform noise (gam)");
  gen->add_option("--out", gen_out, "Dataset CSV")->required();
  gen->add_option("--truth", gen_truth, "Ground-truth JSON");

  // test
  auto* test = app.add_subcommand("test", "Run a statistical test on a dataset");
  std::string test_data, test_query, test_names;
  double test_alpha = 0.05;
  test->add_option("--data", test_data, "Dataset CSV")->required();
  test->add_option("--query", test_query, "Query, e.g. ci:0,2|1")->required();
  test->add_option("--alpha", test_alpha, "Significance level");
  test->add_option("--names", test_names, "Universe JSON {\"names\": [...]}");

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a causal model from tests on data");
  std::string fit_kind, fit_data, fit_out, fit_labels;
  double fit_alpha = 0.05;
  std::size_t fit_k = 0;
  int fit_max_cond = 1;
  fit->add_option("learner", fit_kind, "pc, polytree or path")->required()->check(CLI::IsMember({"pc", "polytree", "path"}));
  fit->add_option("--data", fit_data, "Dataset CSV")->required();
  fit->add_option("--alpha", fit_alpha, "Significance level");
  fit->add_option("--k", fit_k, "Number of ordered pairs to test (polytree; default all)");
  fit->add_option("--max-cond", fit_max_cond, "Largest conditioning set (pc)");
  fit->add_option("--out", fit_out, "Model JSON")->required();
  fit->add_option("--labels", fit_labels, "Training-labels CSV");

  // predict
  auto* pred = app.add_subcommand("predict", "Predict a property from a model");
  std::string pred_model, pred_query;
  pred->add_option("--model", pred_model, "Model JSON")->required();
  pred->add_option("--query", pred_query, "Query, e.g. corr:0,2")->required();

  // merge
  auto* merge = app.add_subcommand("merge", "Glue two bivariate Gaussians along X -> Y -> Z");
  std::string merge_xy, merge_yz, merge_out;
  merge->add_option("--xy", merge_xy, "2x2 covariance JSON of (X, Y)")->required();
  merge->add_option("--yz", merge_yz, "2x2 covariance JSON of (Y, Z)")->required();
  merge->add_option("--out", merge_out, "Output JSON");

  // bound
  auto* bound = app.add_subcommand("bound", "Generalization bound for a model class");
  std::string bound_class;
  int bound_n = 0;
  std::uint64_t bound_k = 0;
  double bound_eta = 0.1, bound_emp = 0.0;
  cv::BoundsConfig bounds_cfg;
  bound->add_option("--class", bound_class, "alldags, polytrees, pathsign, pathcorr, directionality")->required();
  bound->add_option("--n", bound_n, "Number of variables")->required();
  bound->add_option("--k", bound_k, "Number of training sets")->required();
  bound->add_option("--eta", bound_eta, "Failure probability");
  bound->add_option("--empirical", bound_emp, "Empirical risk");
  bound->add_option("--path-corr-constant", bounds_cfg.path_corr_constant, "Capacity constant for pathcorr");

  // plan
  auto* plan = app.add_subcommand("plan", "Smallest number of training sets reaching a target gap");
  std::string plan_class;
  int plan_n = 0, plan_cond = 1;
  double plan_eps = 0.1, plan_eta = 0.1;
  plan->add_option("--class", plan_class, "Model class")->required();
  plan->add_option("--n", plan_n, "Number of variables")->required();
  plan->add_option("--eps", plan_eps, "Target gap");
  plan->add_option("--eta", plan_eta, "Failure probability");
  plan->add_option("--cond-size", plan_cond, "Conditioning-set size counted as possible tests");
  plan->add_option("--path-corr-constant", bounds_cfg.path_corr_constant, "Capacity constant for pathcorr");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Empirical versus expected risk experiment");
  std::string exp_kind, exp_config, exp_out;
  exp->add_option("kind", exp_kind, "ci or anm")->required()->check(CLI::IsMember({"ci", "anm"}));
  exp->add_option("--config", exp_config, "Config JSON");
  exp->add_option("--out", exp_out, "Report CSV (default stdout)");

  if (argc < 2) {
    std::cerr << app.help();
    return 1;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*gen) {
      cv::Json truth;
      cv::Dataset data;
      if (gen_model == "linear") {
        const auto scm = cv::gen_linear_scm(gen_n, gen_degree, seed);
        data = cv::sample(scm, gen_l, cv::derive_seed(seed, 1)).dataset;
        truth = cv::truth_to_json(scm);
      } else {
        cv::GamConfig gc;
        gc.noise_half_width = gen_noise;
        const auto scm = cv::gen_gam_scm(gen_n, gen_degree, seed, gc);
        data = cv::sample(scm, gen_l, cv::derive_seed(seed, 1)).dataset;
        truth = cv::truth_to_json(scm);
      }
      auto f = open_out(gen_out);
      cv::write_dataset(f, data);
      if (!gen_truth.empty()) print_json(truth, gen_truth);
    } else if (*test) {
      const auto names = load_names(test_names);
      const cv::Universe* u = names ? &*names : nullptr;
      const cv::Dataset d = cv::load_dataset(test_data, u);
      const auto pq = cv::parse_query(test_query, u);
      cv::Json j = cv::to_json(run_test(d, pq, test_alpha));
      j["query"] = cv::format_query(pq);
      print_json(j);
    } else if (*fit) {
      const cv::Dataset d = cv::load_dataset(fit_data);
      cv::Json model;
      if (fit_kind == "pc") {
        const auto r = cv::pc_fit(d, fit_alpha, fit_max_cond);
        model = r.cpdag.undirected().empty() ? cv::model_to_json(cv::Dag(r.cpdag.n(), r.cpdag.directed()))
                                             : cv::model_to_json(r.cpdag);
        write_labels(fit_labels, r.training, cv::Property::Ci);
      } else if (fit_kind == "polytree") {
        const int n = cv::detail::dense_universe_size(d);
        const std::size_t k = fit_k ? fit_k : static_cast<std::size_t>(n) * (n - 1);
        const auto r = cv::polytree_from_anm(d, k, fit_alpha, seed);
        model = cv::model_to_json(r.tree.dag());
        write_labels(fit_labels, r.training, cv::Property::Anm);
      } else {
        model = cv::model_to_json(cv::fit_path_model(d));
      }
      print_json(model, fit_out);
    } else if (*pred) {
      const auto model = cv::load_model(pred_model);
      const auto pq = cv::parse_query(pred_query);
      cv::Json j = cv::to_json(cv::predict(model, pq));
      j["query"] = cv::format_query(pq);
      print_json(j);
    } else if (*merge) {
      const Eigen::MatrixXd xy = cv::matrix_from_json(cv::read_json_file(merge_xy));
      const Eigen::MatrixXd yz = cv::matrix_from_json(cv::read_json_file(merge_yz));
      if (xy.rows() != 2 || xy.cols() != 2 || yz.rows() != 2 || yz.cols() != 2) {
        throw cv::Error(cv::Errc::SizeMismatch, "merge needs two 2x2 covariance matrices");
      }
      const Eigen::Matrix3d g = cv::glue_gaussian_chain(xy, yz);
      print_json({{"variables", {"X", "Y", "Z"}}, {"cov", cv::matrix_to_json(g)}}, merge_out);
    } else if (*bound) {
      const auto c = cv::parse_model_class(bound_class);
      print_json(cv::to_json(cv::bound_report(c, bound_n, bound_k, bound_eta, bound_emp, bounds_cfg)));
    } else if (*plan) {
      const auto c = cv::parse_model_class(plan_class);
      const auto k = cv::min_training_sets(c, plan_n, plan_eps, plan_eta, bounds_cfg);
      const auto kind = planning_kind(c);
      const auto possible = cv::count_queries(plan_n, kind, kind == cv::QueryKind::CondIndep ? plan_cond : 0);
      print_json({{"class", cv::model_class_name(c)},
                  {"n", plan_n},
                  {"eps", plan_eps},
                  {"eta", plan_eta},
                  {"h", cv::vc_upper_bound(c, plan_n, bounds_cfg)},
                  {"min_k", k},
                  {"possible_tests", possible},
                  {"fraction", static_cast<double>(k) / static_cast<double>(possible)}});
    } else if (*exp) {
      cv::Json j = exp_config.empty() ? cv::Json::object() : cv::read_json_file(exp_config);
      j["experiment"] = exp_kind;
      if (!j.contains("seed")) j["seed"] = seed;
      const auto records = cv::run_experiment(cv::experiment_config_from_json(j));
      if (exp_out.empty()) {
        cv::write_report(std::cout, records);
      } else {
        auto f = open_out(exp_out);
        cv::write_report(f, records);
      }
    }
  } catch (const cv::Error& e) {
    std::cerr << cv::Json{{"error", cv::errc_name(e.code())}, {"message", e.what()}}.dump() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << cv::Json{{"error", "Internal"}, {"message", e.what()}}.dump() << '\n';
    return 2;
  }
  return 0;
}
