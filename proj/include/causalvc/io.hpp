#pragma once

// Text formats: the query grammar, JSON for models, ground truths, outcomes
// and configs, and the predict dispatcher shared by the command-line tool.

#include <charconv>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "causalvc/harness.hpp"

namespace causalvc {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Query grammar
//   ci:<a>,<b>|<c1>,<c2>,...   anm:<i>-><j>   dir:<i>-><j>
//   corr:<a>,<b>               sign:<a>,<b>   lingam:<t1>,<t2>,...

enum class Property { Ci, Anm, Dir, Corr, Sign, Lingam };

inline std::string_view property_name(Property p) {
  switch (p) {
    case Property::Ci: return "ci";
    case Property::Anm: return "anm";
    case Property::Dir: return "dir";
    case Property::Corr: return "corr";
    case Property::Sign: return "sign";
    case Property::Lingam: return "lingam";
  }
  return "?";
}

struct PropertyQuery {
  Property property;
  Query query;
};

namespace detail {

inline VariableId parse_variable(std::string_view tok, const Universe* universe) {
  tok = trim(tok);
  if (tok.empty()) throw Error(Errc::ParseError, "empty variable");
  if (auto v = parse_int(tok)) {
    if (*v < 0) throw Error(Errc::ParseError, "negative variable id");
    return static_cast<VariableId>(*v);
  }
  if (universe) {
    if (auto id = universe->find(std::string(tok))) return *id;
    throw Error(Errc::UnknownNode, "unknown variable '" + std::string(tok) + "'");
  }
  throw Error(Errc::ParseError, "bad variable '" + std::string(tok) + "'");
}

inline std::vector<VariableId> parse_variable_list(std::string_view s, const Universe* universe) {
  std::vector<VariableId> out;
  if (trim(s).empty()) return out;
  for (auto tok : split(s, ',')) out.push_back(parse_variable(tok, universe));
  return out;
}

inline std::string join_ids(std::span<const VariableId> ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) s += (i ? "," : "") + std::to_string(ids[i]);
  return s;
}

}  // namespace detail

inline PropertyQuery parse_query(std::string_view text, const Universe* universe = nullptr) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw Error(Errc::ParseError, "query needs '<kind>:' prefix");
  const auto head = detail::trim(text.substr(0, colon));
  const auto body = text.substr(colon + 1);
  try {
    if (head == "ci") {
      const auto bar = body.find('|');
      const auto pair = detail::parse_variable_list(body.substr(0, bar), universe);
      if (pair.size() != 2) throw Error(Errc::ParseError, "ci query needs exactly two targets");
      std::vector<VariableId> cond;
      if (bar != std::string_view::npos) cond = detail::parse_variable_list(body.substr(bar + 1), universe);
      return {Property::Ci, Query::cond_indep(pair[0], pair[1], cond)};
    }
    if (head == "anm" || head == "dir") {
      const auto arrow = body.find("->");
      if (arrow == std::string_view::npos) throw Error(Errc::ParseError, "expected '<i>-><j>'");
      const VariableId a = detail::parse_variable(body.substr(0, arrow), universe);
      const VariableId b = detail::parse_variable(body.substr(arrow + 2), universe);
      return {head == "anm" ? Property::Anm : Property::Dir, Query::ordered_pair(a, b)};
    }
    if (head == "corr" || head == "sign") {
      const auto pair = detail::parse_variable_list(body, universe);
      if (pair.size() != 2) throw Error(Errc::ParseError, "pair query needs exactly two variables");
      return {head == "corr" ? Property::Corr : Property::Sign, Query::unordered_pair(pair[0], pair[1])};
    }
    if (head == "lingam") return {Property::Lingam, Query::ordered_tuple(detail::parse_variable_list(body, universe))};
  } catch (const Error& e) {
    if (e.code() == Errc::InvalidSize) throw Error(Errc::ParseError, e.what());
    throw;
  }
  throw Error(Errc::ParseError, "unknown query kind '" + std::string(head) + "'");
}

inline std::string format_query(const PropertyQuery& pq) {
  const Query& q = pq.query;
  const std::string head = std::string(property_name(pq.property)) + ":";
  switch (pq.property) {
    case Property::Ci: {
      const VariableId pair[2] = {q.first(), q.second()};
      return head + detail::join_ids(pair) + "|" + detail::join_ids(q.conditioning());
    }
    case Property::Anm:
    case Property::Dir: return head + std::to_string(q.first()) + "->" + std::to_string(q.second());
    default: return head + detail::join_ids(q.members());
  }
}

/// The property a query kind is labelled with by default.
inline Property default_property(QueryKind k) {
  switch (k) {
    case QueryKind::CondIndep: return Property::Ci;
    case QueryKind::OrderedPair: return Property::Anm;
    case QueryKind::UnorderedPair: return Property::Corr;
    case QueryKind::OrderedTuple: return Property::Lingam;
  }
  return Property::Ci;
}

// ---------------------------------------------------------------------------
// Property values and outcomes

inline Json to_json(const PropertyValue& v) {
  return std::visit(
      [](const auto& x) -> Json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Matrix>) {
          Json rows = Json::array();
          for (Eigen::Index i = 0; i < x.value.rows(); ++i) {
            Json row = Json::array();
            for (Eigen::Index j = 0; j < x.value.cols(); ++j) row.push_back(x.value(i, j));
            rows.push_back(row);
          }
          return {{"type", "matrix"}, {"value", rows}};
        } else {
          return {{"type", std::string(tag_name(PropertyValue{x}))}, {"value", x.value}};
        }
      },
      v);
}

inline std::string value_text(const PropertyValue& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Matrix>) {
          return to_json(PropertyValue{x})["value"].dump();
        } else if constexpr (std::is_same_v<T, Real>) {
          return Json(x.value).dump();
        } else {
          return std::to_string(x.value);
        }
      },
      v);
}

inline Json to_json(const TestOutcome& o) {
  Json j = to_json(o.value);
  j["p_value"] = o.p_value ? Json(*o.p_value) : Json(nullptr);
  if (o.alpha) j["alpha"] = *o.alpha;
  if (o.dependence_p_value) j["dependence_p_value"] = *o.dependence_p_value;
  return j;
}

// ---------------------------------------------------------------------------
// Matrices

inline Eigen::MatrixXd matrix_from_json(const Json& j) {
  const Json& rows = j.is_object() && j.contains("cov") ? j.at("cov") : j;
  if (!rows.is_array() || rows.empty()) throw Error(Errc::ParseError, "expected a non-empty matrix");
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows[0].size());
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != c) throw Error(Errc::ParseError, "ragged matrix");
    for (Eigen::Index k = 0; k < c; ++k) m(i, k) = rows[i][k].get<double>();
  }
  return m;
}

inline Json matrix_to_json(const Eigen::MatrixXd& m) { return to_json(PropertyValue{Matrix{m}})["value"]; }

// ---------------------------------------------------------------------------
// Models

inline Json edges_to_json(const std::vector<Edge>& edges) {
  Json a = Json::array();
  for (auto [x, y] : edges) a.push_back({x, y});
  return a;
}

inline std::vector<Edge> edges_from_json(const Json& j) {
  std::vector<Edge> out;
  if (j.is_null()) return out;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2) throw Error(Errc::ParseError, "edge must be a pair");
    out.emplace_back(e[0].get<int>(), e[1].get<int>());
  }
  return out;
}

using Model = std::variant<Dag, Cpdag, PathModel>;

inline Json model_to_json(const Dag& g) {
  return {{"n", g.n()}, {"directed", edges_to_json(g.edges())}, {"undirected", Json::array()},
          {"class", is_polytree(g) ? "polytree" : "dag"}};
}

inline Json model_to_json(const Cpdag& c) {
  return {{"n", c.n()}, {"directed", edges_to_json(c.directed())}, {"undirected", edges_to_json(c.undirected())},
          {"class", "cpdag"}};
}

inline Json model_to_json(const PathModel& m) { return {{"order", m.order()}, {"r", m.r()}}; }

inline Json model_to_json(const Model& m) {
  return std::visit([](const auto& x) { return model_to_json(x); }, m);
}

/// A graph without undirected edges loads as a Dag, otherwise as a Cpdag.
inline Model model_from_json(const Json& j) {
  try {
    if (j.contains("order")) return PathModel(j.at("order").get<std::vector<int>>(), j.at("r").get<std::vector<double>>());
    const int n = j.at("n").get<int>();
    auto directed = edges_from_json(j.value("directed", Json::array()));
    auto undirected = edges_from_json(j.value("undirected", Json::array()));
    if (undirected.empty()) return Dag(n, directed);
    return Cpdag(n, directed, undirected);
  } catch (const Json::exception& e) {
    throw Error(Errc::ParseError, std::string("model JSON: ") + e.what());
  }
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::MissingFile, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(Errc::ParseError, path + ": " + e.what());
  }
}

inline Model load_model(const std::string& path) { return model_from_json(read_json_file(path)); }

namespace detail {

[[noreturn]] inline void unsupported(Property p, std::string_view model) {
  throw Error(Errc::UnsupportedQueryForModel,
              std::string(property_name(p)) + " queries are not supported by " + std::string(model) + " models");
}

inline void check_width(int n, const Query& q) {
  for (VariableId v : q.members())
    if (v >= n) throw Error(Errc::UnknownNode, "variable " + std::to_string(v) + " is not in the model");
}

inline PropertyValue predict_dag(const Dag& g, const PropertyQuery& pq) {
  check_width(g.n(), pq.query);
  switch (pq.property) {
    case Property::Ci: return q_ci_dag(g, pq.query);
    case Property::Dir: return q_dirpath(g, pq.query);
    case Property::Lingam: return q_lingam_admissible(g, pq.query);
    case Property::Anm:
      if (!is_polytree(g)) unsupported(pq.property, "non-polytree DAG");
      return q_anm_polytree(Polytree(g), pq.query);
    default: unsupported(pq.property, "DAG");
  }
}

}  // namespace detail

/// Routes a parsed query to the predictor of the model class. CPDAGs answer
/// CI queries only (all members of the class agree on them); path models
/// answer corr/sign, and CI through their chain DAG.
inline PropertyValue predict(const Model& model, const PropertyQuery& pq) {
  if (const auto* g = std::get_if<Dag>(&model)) return detail::predict_dag(*g, pq);
  if (const auto* c = std::get_if<Cpdag>(&model)) {
    if (pq.property != Property::Ci) detail::unsupported(pq.property, "CPDAG");
    detail::check_width(c->n(), pq.query);
    return q_ci_dag(random_dag_from_cpdag(*c, 0), pq.query);
  }
  const auto& m = std::get<PathModel>(model);
  detail::check_width(m.n(), pq.query);
  switch (pq.property) {
    case Property::Corr: return path_corr(m, pq.query);
    case Property::Sign: return path_sign(m, pq.query);
    case Property::Ci: return q_ci_dag(m.chain_dag(), pq.query);
    default: detail::unsupported(pq.property, "path");
  }
}

// ---------------------------------------------------------------------------
// Ground truths

inline Json truth_to_json(const LinearScm& scm) {
  Json coeffs = Json::array();
  for (const auto& [a, b] : scm.dag().edges()) coeffs.push_back({a, b, scm.coeffs(b, a)});
  return {{"model", "linear"},
          {"n", scm.n},
          {"order", scm.order},
          {"edges", edges_to_json(scm.dag().edges())},
          {"coeffs", coeffs}};
}

inline Json truth_to_json(const GamScm& scm) {
  Json mech = Json::array();
  for (const auto& [e, m] : scm.mechanisms)
    mech.push_back({{"edge", {e.first, e.second}}, {"w1", m.w1}, {"b", m.b}, {"w2", m.w2}});
  return {{"model", "gam"},
          {"n", scm.n},
          {"order", scm.order},
          {"edges", edges_to_json(scm.dag.edges())},
          {"mechanisms", mech},
          {"noise_half_width", scm.config.noise_half_width}};
}

/// Reads the edges of a truth file as a Dag.
inline Dag truth_dag_from_json(const Json& j) {
  try {
    return Dag(j.at("n").get<int>(), edges_from_json(j.at("edges")));
  } catch (const Json::exception& e) {
    throw Error(Errc::ParseError, std::string("truth JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Universe sidecar {"names": [...]}

inline Universe universe_from_json(const Json& j) {
  try {
    return Universe(j.at("names").get<std::vector<std::string>>());
  } catch (const Json::exception& e) {
    throw Error(Errc::ParseError, std::string("universe JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Bounds and experiments

inline Json to_json(const BoundReport& r) {
  Json j = {{"class", model_class_name(r.model_class)},
            {"n", r.n},
            {"h", r.h},
            {"k", r.k},
            {"eta", r.eta},
            {"empirical_risk", r.empirical_risk},
            {"gap", r.gap},
            {"bound", r.bound}};
  if (r.capacity_constant) {
    j["capacity_constant"] = *r.capacity_constant;
    j["note"] = "holds up to the configured capacity constant";
  }
  return j;
}

inline ExperimentConfig experiment_config_from_json(const Json& j) {
  ExperimentConfig c;
  try {
    if (j.contains("experiment")) c.experiment = parse_experiment(j.at("experiment").get<std::string>());
    c.n = j.value("n", c.n);
    c.l = j.value("l", c.l);
    c.alpha = j.value("alpha", c.alpha);
    c.expected_degree = j.value("expected_degree", c.expected_degree);
    c.ks = j.value("k", c.ks);
    c.max_cond = j.value("max_cond", c.max_cond);
    c.datasets = j.value("datasets", c.datasets);
    c.repetitions = j.value("repetitions", c.repetitions);
    c.seed = j.value("seed", c.seed);
    c.eta = j.value("eta", c.eta);
    c.oracle = j.value("oracle", c.oracle);
    if (j.contains("ci_training")) {
      const auto s = j.at("ci_training").get<std::string>();
      if (s == "executed")
        c.ci_training = CiTrainingSet::Executed;
      else if (s == "sampled")
        c.ci_training = CiTrainingSet::Sampled;
      else
        throw Error(Errc::ParseError, "ci_training must be 'executed' or 'sampled'");
    }
    if (j.contains("bound_class")) c.anm_bound_class = parse_model_class(j.at("bound_class").get<std::string>());
    c.anm.hsic.permutation = j.value("hsic_permutation", c.anm.hsic.permutation);
    c.anm.regression.ridge_per_sample = j.value("ridge_per_sample", c.anm.regression.ridge_per_sample);
    c.gam.noise_half_width = j.value("noise_half_width", c.gam.noise_half_width);
    c.gam.random_output_sign = j.value("random_output_sign", c.gam.random_output_sign);
  } catch (const Json::exception& e) {
    throw Error(Errc::ParseError, std::string("config JSON: ") + e.what());
  }
  return c;
}

}  // namespace causalvc
