#pragma once

// Shared vocabulary: variable universe, datasets, queries over variable
// subsets, property values and the empirical risk between two label lists.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <compare>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "causalvc/error.hpp"
#include "causalvc/rng.hpp"

namespace causalvc {

/// Index into the global universe {0..n-1}.
using VariableId = int;

/// Optional display names for the global universe.
class Universe {
 public:
  Universe() = default;
  explicit Universe(std::vector<std::string> names) : names_(std::move(names)) {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (!index_.emplace(names_[i], static_cast<VariableId>(i)).second) {
        throw Error(Errc::DuplicateColumn, "duplicate universe name '" + names_[i] + "'");
      }
    }
  }

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  std::optional<VariableId> find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::string name(VariableId id) const {
    if (id >= 0 && static_cast<std::size_t>(id) < names_.size()) return names_[id];
    return std::to_string(id);
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, VariableId> index_;
};

// ---------------------------------------------------------------------------
// Queries

enum class QueryKind { CondIndep, OrderedPair, UnorderedPair, OrderedTuple };

inline std::string_view query_kind_name(QueryKind k) {
  switch (k) {
    case QueryKind::CondIndep: return "CondIndep";
    case QueryKind::OrderedPair: return "OrderedPair";
    case QueryKind::UnorderedPair: return "UnorderedPair";
    case QueryKind::OrderedTuple: return "OrderedTuple";
  }
  return "?";
}

/// A partly ordered variable tuple. Members are stored in canonical layout:
///   CondIndep      [y1, y2, c1, ..., cm]  with y1 < y2 and c sorted
///   OrderedPair    [source, target]
///   UnorderedPair  [a, b] with a < b
///   OrderedTuple   [t1, ..., tk] as given
/// so two queries denoting the same allowed input compare equal.
class Query {
 public:
  Query() = default;

  static Query cond_indep(VariableId a, VariableId b, std::vector<VariableId> cond = {}) {
    std::vector<VariableId> m{a, b};
    m.insert(m.end(), cond.begin(), cond.end());
    return Query(QueryKind::CondIndep, std::move(m));
  }
  static Query ordered_pair(VariableId source, VariableId target) {
    return Query(QueryKind::OrderedPair, {source, target});
  }
  static Query unordered_pair(VariableId a, VariableId b) {
    return Query(QueryKind::UnorderedPair, {a, b});
  }
  static Query ordered_tuple(std::vector<VariableId> members) {
    return Query(QueryKind::OrderedTuple, std::move(members));
  }

  /// Validates and canonicalizes. Throws InvalidSize on malformed member lists.
  Query(QueryKind kind, std::vector<VariableId> members) : kind_(kind), members_(std::move(members)) {
    validate();
    canonicalize();
  }

  QueryKind kind() const { return kind_; }
  std::span<const VariableId> members() const { return members_; }
  std::size_t size() const { return members_.size(); }

  VariableId first() const { return members_[0]; }
  VariableId second() const { return members_[1]; }
  std::span<const VariableId> conditioning() const {
    if (kind_ != QueryKind::CondIndep) return {};
    return std::span<const VariableId>(members_).subspan(2);
  }

  /// Sorted member set (the variables whose joint data the query needs).
  std::vector<VariableId> variables() const {
    std::vector<VariableId> v = members_;
    std::sort(v.begin(), v.end());
    return v;
  }

  auto operator<=>(const Query&) const = default;
  bool operator==(const Query&) const = default;

 private:
  void validate() const {
    const std::size_t m = members_.size();
    switch (kind_) {
      case QueryKind::CondIndep:
        if (m < 2) throw Error(Errc::InvalidSize, "conditional independence query needs a target pair");
        break;
      case QueryKind::OrderedPair:
      case QueryKind::UnorderedPair:
        if (m != 2) throw Error(Errc::InvalidSize, "pair query needs exactly two members");
        break;
      case QueryKind::OrderedTuple:
        if (m < 1) throw Error(Errc::InvalidSize, "tuple query needs at least one member");
        break;
    }
    std::vector<VariableId> s = members_;
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end()) {
      throw Error(Errc::InvalidSize, "query members must be distinct");
    }
    if (!s.empty() && s.front() < 0) throw Error(Errc::InvalidSize, "negative variable id");
  }

  void canonicalize() {
    switch (kind_) {
      case QueryKind::CondIndep:
        if (members_[0] > members_[1]) std::swap(members_[0], members_[1]);
        std::sort(members_.begin() + 2, members_.end());
        break;
      case QueryKind::UnorderedPair:
        if (members_[0] > members_[1]) std::swap(members_[0], members_[1]);
        break;
      default:
        break;
    }
  }

  QueryKind kind_ = QueryKind::CondIndep;
  std::vector<VariableId> members_;
};

inline Query canonical(const Query& q) {
  return Query(q.kind(), std::vector<VariableId>(q.members().begin(), q.members().end()));
}

// ---------------------------------------------------------------------------
// Property values

struct Binary {
  int value = 0;
  bool operator==(const Binary&) const = default;
};
struct Real {
  double value = 0.0;
  bool operator==(const Real&) const = default;
};
struct Sign {
  int value = 1;
  bool operator==(const Sign&) const = default;
};
struct Matrix {
  Eigen::MatrixXd value;
  bool operator==(const Matrix& o) const {
    return value.rows() == o.value.rows() && value.cols() == o.value.cols() && value == o.value;
  }
};

/// Output space of a statistical property. Binary uses 1 = "property holds"
/// (e.g. independence), 0 = "does not hold".
using PropertyValue = std::variant<Binary, Real, Sign, Matrix>;

inline PropertyValue make_binary(int v) {
  if (v != 0 && v != 1) throw Error(Errc::InvalidParams, "binary value must be 0 or 1");
  return Binary{v};
}
inline PropertyValue make_sign(int v) {
  if (v != -1 && v != 1) throw Error(Errc::InvalidParams, "sign value must be -1 or +1");
  return Sign{v};
}
inline PropertyValue make_real(double v) { return Real{v}; }

inline PropertyValue make_matrix(Eigen::MatrixXd m) {
  if (m.rows() != m.cols()) throw Error(Errc::NonPsdInput, "matrix value must be square");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9) throw Error(Errc::NonPsdInput, "matrix value not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-9) throw Error(Errc::NonPsdInput, "matrix value not PSD");
  return Matrix{std::move(m)};
}

inline std::string_view tag_name(const PropertyValue& v) {
  static constexpr std::string_view names[] = {"binary", "real", "sign", "matrix"};
  return names[v.index()];
}

/// Scalar loss |a - b|; Binary and Sign use 0/1 disagreement.
inline double abs_deviation(const PropertyValue& a, const PropertyValue& b) {
  if (a.index() != b.index()) {
    throw Error(Errc::TagMismatch, std::string(tag_name(a)) + " vs " + std::string(tag_name(b)));
  }
  if (auto* x = std::get_if<Binary>(&a)) return x->value == std::get<Binary>(b).value ? 0.0 : 1.0;
  if (auto* x = std::get_if<Sign>(&a)) return x->value == std::get<Sign>(b).value ? 0.0 : 1.0;
  if (auto* x = std::get_if<Real>(&a)) return std::abs(x->value - std::get<Real>(b).value);
  throw Error(Errc::TagMismatch, "matrix-valued properties have no scalar loss");
}

/// Mean absolute deviation between model predictions and test results.
inline double empirical_error(std::span<const PropertyValue> predictions,
                              std::span<const PropertyValue> results) {
  if (predictions.size() != results.size()) {
    throw Error(Errc::LengthMismatch, std::to_string(predictions.size()) + " predictions vs " +
                                          std::to_string(results.size()) + " results");
  }
  if (predictions.empty()) throw Error(Errc::LengthMismatch, "empty label lists");
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) sum += abs_deviation(predictions[i], results[i]);
  return sum / static_cast<double>(predictions.size());
}

// ---------------------------------------------------------------------------
// Datasets

/// l x k sample matrix whose columns refer to global variable ids.
class Dataset {
 public:
  Dataset() = default;
  Dataset(Eigen::MatrixXd samples, std::vector<VariableId> columns)
      : samples_(std::move(samples)), columns_(std::move(columns)) {
    if (static_cast<std::size_t>(samples_.cols()) != columns_.size()) {
      throw Error(Errc::SizeMismatch, "sample matrix has " + std::to_string(samples_.cols()) +
                                          " columns but " + std::to_string(columns_.size()) + " ids");
    }
    if (samples_.rows() < 1) throw Error(Errc::EmptyBody, "dataset needs at least one row");
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      if (columns_[i] < 0) throw Error(Errc::InvalidSize, "negative variable id");
      auto [it, fresh] = position_.emplace(columns_[i], static_cast<int>(i));
      if (!fresh) throw Error(Errc::DuplicateColumn, "variable " + std::to_string(columns_[i]));
    }
  }

  Eigen::Index rows() const { return samples_.rows(); }
  std::size_t width() const { return columns_.size(); }
  const Eigen::MatrixXd& samples() const { return samples_; }
  const std::vector<VariableId>& columns() const { return columns_; }

  bool contains(VariableId id) const { return position_.count(id) != 0; }

  int index_of(VariableId id) const {
    auto it = position_.find(id);
    if (it == position_.end()) throw Error(Errc::MissingVariable, "variable " + std::to_string(id));
    return it->second;
  }

  Eigen::VectorXd column(VariableId id) const { return samples_.col(index_of(id)); }

 private:
  Eigen::MatrixXd samples_;
  std::vector<VariableId> columns_;
  std::unordered_map<VariableId, int> position_;
};

/// Marginalizes `d` to the query's variables, in the query's canonical order.
inline Dataset project(const Dataset& d, const Query& q) {
  const auto members = q.members();
  Eigen::MatrixXd out(d.rows(), static_cast<Eigen::Index>(members.size()));
  for (std::size_t j = 0; j < members.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = d.samples().col(d.index_of(members[j]));
  return Dataset(std::move(out), std::vector<VariableId>(members.begin(), members.end()));
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(delim, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<long long> parse_int(std::string_view s) {
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

}  // namespace detail

/// Parses a CSV dataset. The header holds integer variable ids or names
/// resolvable through `universe`.
inline Dataset parse_dataset(std::istream& in, const Universe* universe = nullptr) {
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::EmptyBody, "missing header row");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
  std::vector<VariableId> columns;
  for (auto tok : detail::split(line, ',')) {
    if (auto id = detail::parse_int(tok)) {
      columns.push_back(static_cast<VariableId>(*id));
    } else if (universe != nullptr && universe->find(std::string(tok))) {
      columns.push_back(*universe->find(std::string(tok)));
    } else {
      throw Error(Errc::MissingVariable, "header token '" + std::string(tok) + "' is not an id or known name");
    }
  }
  {
    std::vector<VariableId> s = columns;
    std::sort(s.begin(), s.end());
    auto dup = std::adjacent_find(s.begin(), s.end());
    if (dup != s.end()) throw Error(Errc::DuplicateColumn, "variable " + std::to_string(*dup));
  }
  std::vector<double> values;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    auto cells = detail::split(line, ',');
    if (cells.size() != columns.size()) {
      throw Error(Errc::SizeMismatch, "row " + std::to_string(row + 1) + " has " + std::to_string(cells.size()) +
                                          " cells, header has " + std::to_string(columns.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      auto v = detail::parse_double(cells[c]);
      if (!v) {
        throw Error(Errc::NonNumericCell, "cell '" + std::string(cells[c]) + "' at (row " + std::to_string(row + 1) +
                                              ", col " + std::to_string(c + 1) + ")");
      }
      values.push_back(*v);
    }
    ++row;
  }
  if (row == 0) throw Error(Errc::EmptyBody, "no data rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t r = 0; r < row; ++r)
    for (std::size_t c = 0; c < columns.size(); ++c) m(r, c) = values[r * columns.size() + c];
  return Dataset(std::move(m), std::move(columns));
}

inline Dataset load_dataset(const std::string& path, const Universe* universe = nullptr) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::MissingFile, path);
  return parse_dataset(in, universe);
}

/// Writes ids in the header and every value with round-trip precision.
inline void write_dataset(std::ostream& out, const Dataset& d) {
  const auto& cols = d.columns();
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  char buf[32];
  for (Eigen::Index r = 0; r < d.rows(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      auto [p, ec] = std::to_chars(buf, buf + sizeof buf, d.samples()(r, static_cast<Eigen::Index>(c)));
      if (c) out << ',';
      out.write(buf, p - buf);
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Query universes

namespace detail {

template <typename F>
void for_each_subset(const std::vector<VariableId>& pool, std::size_t size, F&& f) {
  if (size > pool.size()) return;
  std::vector<std::size_t> idx(size);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<VariableId> subset(size);
  while (true) {
    for (std::size_t i = 0; i < size; ++i) subset[i] = pool[idx[i]];
    f(subset);
    std::size_t i = size;
    while (i > 0 && idx[i - 1] == pool.size() - size + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < size; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace detail

/// Every allowed input of the given kind over n variables, canonical and
/// sorted. `cond_size` is the conditioning-set size for CondIndep and the
/// number of members beyond the first two for OrderedTuple; pair kinds ignore it.
inline std::vector<Query> enumerate_queries(int n, QueryKind kind, int cond_size = 0) {
  if (n < 2) throw Error(Errc::InvalidSize, "n must be >= 2");
  if (cond_size < 0) throw Error(Errc::InvalidSize, "cond_size must be >= 0");
  std::vector<Query> out;
  switch (kind) {
    case QueryKind::CondIndep: {
      if (cond_size > n - 2) throw Error(Errc::InvalidSize, "cond_size must be <= n-2");
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
          std::vector<VariableId> pool;
          for (int c = 0; c < n; ++c)
            if (c != a && c != b) pool.push_back(c);
          detail::for_each_subset(pool, static_cast<std::size_t>(cond_size),
                                  [&](const std::vector<VariableId>& s) { out.push_back(Query::cond_indep(a, b, s)); });
        }
      break;
    }
    case QueryKind::OrderedPair:
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          if (a != b) out.push_back(Query::ordered_pair(a, b));
      break;
    case QueryKind::UnorderedPair:
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) out.push_back(Query::unordered_pair(a, b));
      break;
    case QueryKind::OrderedTuple: {
      const int len = cond_size + 2;
      if (len > n) throw Error(Errc::InvalidSize, "tuple longer than universe");
      std::vector<VariableId> all(static_cast<std::size_t>(n));
      std::iota(all.begin(), all.end(), 0);
      detail::for_each_subset(all, static_cast<std::size_t>(len), [&](std::vector<VariableId> s) {
        do out.push_back(Query::ordered_tuple(s));
        while (std::next_permutation(s.begin(), s.end()));
      });
      break;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// k distinct queries drawn uniformly without replacement (partial Fisher-Yates).
inline std::vector<Query> sample_queries(std::span<const Query> universe, std::size_t k, std::uint64_t seed) {
  if (k < 1 || k > universe.size()) {
    throw Error(Errc::KTooLarge, "k=" + std::to_string(k) + " with universe of " + std::to_string(universe.size()));
  }
  std::vector<std::size_t> idx(universe.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng = make_rng(seed);
  std::vector<Query> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
    out.push_back(universe[idx[i]]);
  }
  return out;
}

}  // namespace causalvc
