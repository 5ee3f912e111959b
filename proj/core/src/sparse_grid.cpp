#include "beamuq/sparse_grid.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "parallel_util.hpp"

namespace beamuq {

namespace {

// Exact-identity key: raw bytes of the coordinate doubles.
std::string point_key_bytes(std::span<const double> coords) {
  std::string key(coords.size() * sizeof(double), '\0');
  std::memcpy(key.data(), coords.data(), key.size());
  return key;
}

}  // namespace

TensorGrid::TensorGrid(MultiIndex index, std::vector<UnivariateRule> rules)
    : index_(std::move(index)), rules_(std::move(rules)) {
  if (rules_.empty() || index_.size() != rules_.size()) {
    throw std::invalid_argument("TensorGrid: rule/index dimension mismatch");
  }
  strides_.assign(rules_.size(), 1);
  point_count_ = 1;
  for (std::size_t n = rules_.size(); n-- > 0;) {
    strides_[n] = point_count_;
    point_count_ *= static_cast<std::size_t>(rules_[n].count());
  }
}

ParameterPoint TensorGrid::point(std::size_t rank) const {
  ParameterPoint p(rules_.size());
  for (std::size_t n = 0; n < rules_.size(); ++n) {
    const std::size_t j = (rank / strides_[n]) % static_cast<std::size_t>(rules_[n].count());
    p[n] = rules_[n].nodes[j];
  }
  return p;
}

double TensorGrid::weight(std::size_t rank) const {
  double w = 1.0;
  for (std::size_t n = 0; n < rules_.size(); ++n) {
    const std::size_t j = (rank / strides_[n]) % static_cast<std::size_t>(rules_[n].count());
    w *= rules_[n].weights[j];
  }
  return w;
}

std::vector<int> TensorGrid::point_key(std::size_t rank) const {
  std::vector<int> key(rules_.size());
  for (std::size_t n = 0; n < rules_.size(); ++n) {
    key[n] = static_cast<int>((rank / strides_[n]) % static_cast<std::size_t>(rules_[n].count()));
  }
  return key;
}

SparseGrid::SparseGrid(ParameterSpace space, std::vector<SparseGridTerm> terms,
                       MultiIndexSet index_set)
    : space_(std::move(space)), terms_(std::move(terms)), index_set_(std::move(index_set)) {
  for (const auto& term : terms_) {
    if (term.coefficient == 0) {
      throw std::invalid_argument("SparseGrid: zero-coefficient term stored");
    }
  }
}

SparseGrid build_sparse_grid(const ParameterSpace& space,
                             const std::vector<FamilyPtr>& families,
                             const LevelToKnots& level_to_knots,
                             const MultiIndexSet& index_set) {
  if (static_cast<int>(families.size()) != space.dim()) {
    throw std::invalid_argument("build_sparse_grid: one family per dimension required");
  }
  if (index_set.dim() != space.dim()) {
    throw std::invalid_argument("build_sparse_grid: index set dimension mismatch");
  }
  const auto coefficients = combination_coefficients(index_set);

  // Rules are shared across terms; build each (dimension, count) pair once.
  std::map<std::pair<int, int>, UnivariateRule> rule_cache;
  auto rule_for = [&](int dim, int count) -> const UnivariateRule& {
    auto key = std::make_pair(dim, count);
    auto it = rule_cache.find(key);
    if (it == rule_cache.end()) {
      it = rule_cache.emplace(key, families[static_cast<std::size_t>(dim)]->rule(count)).first;
    }
    return it->second;
  };

  std::vector<SparseGridTerm> terms;
  terms.reserve(coefficients.size());
  for (const auto& [index, coefficient] : coefficients) {
    std::vector<UnivariateRule> rules;
    rules.reserve(index.size());
    for (std::size_t n = 0; n < index.size(); ++n) {
      rules.push_back(rule_for(static_cast<int>(n), level_to_knots(index[n])));
    }
    terms.push_back(SparseGridTerm{index, coefficient, TensorGrid(index, std::move(rules))});
  }
  return SparseGrid(space, std::move(terms), index_set);
}

ReducedSparseGrid reduce(const SparseGrid& grid) {
  ReducedSparseGrid reduced;
  std::unordered_map<std::string, std::uint32_t> seen;
  reduced.back_map.resize(grid.terms().size());
  for (std::size_t t = 0; t < grid.terms().size(); ++t) {
    const auto& term = grid.terms()[t];
    const std::size_t count = term.grid.point_count();
    auto& slots = reduced.back_map[t];
    slots.resize(count);
    for (std::size_t r = 0; r < count; ++r) {
      ParameterPoint p = term.grid.point(r);
      auto [it, inserted] =
          seen.emplace(point_key_bytes(p), static_cast<std::uint32_t>(reduced.points.size()));
      if (inserted) {
        reduced.points.push_back(std::move(p));
        reduced.weights.push_back(0.0);
      }
      slots[r] = it->second;
      reduced.weights[it->second] += term.coefficient * term.grid.weight(r);
    }
  }
  return reduced;
}

EvaluationError::EvaluationError(const std::string& what, ParameterPoint point)
    : std::runtime_error(what), point_(std::move(point)) {}

namespace {

std::string describe_point(const ParameterPoint& p) {
  std::ostringstream oss;
  oss << "(";
  for (std::size_t n = 0; n < p.size(); ++n) {
    if (n) oss << ", ";
    oss << p[n];
  }
  oss << ")";
  return oss.str();
}

}  // namespace

Surrogate evaluate_on_grid(const FomFunction& f, SparseGrid grid, ReducedSparseGrid reduced,
                           const Surrogate* recycle_from, int threads,
                           EvaluationReport* report) {
  const std::size_t count = reduced.size();
  std::vector<std::span<const double>> recycled_rows(count);
  std::vector<bool> have(count, false);
  std::size_t recycled = 0;

  if (recycle_from != nullptr) {
    std::unordered_map<std::string, std::size_t> old_rows;
    old_rows.reserve(recycle_from->reduced.size());
    for (std::size_t q = 0; q < recycle_from->reduced.size(); ++q) {
      old_rows.emplace(point_key_bytes(recycle_from->reduced.points[q]), q);
    }
    std::size_t matched = 0;
    for (std::size_t q = 0; q < count; ++q) {
      auto it = old_rows.find(point_key_bytes(reduced.points[q]));
      if (it != old_rows.end()) {
        recycled_rows[q] = recycle_from->values.row(it->second);
        have[q] = true;
        ++matched;
      }
    }
    if (matched != recycle_from->reduced.size()) {
      throw std::invalid_argument(
          "evaluate_on_grid: recycle_from points are not a subset of the new grid");
    }
    recycled = matched;
  }

  // First fresh evaluation fixes the QoI width; a recycled row does the same.
  std::size_t width = 0;
  if (recycle_from != nullptr) width = recycle_from->values.width();

  std::vector<std::size_t> fresh;
  fresh.reserve(count - recycled);
  for (std::size_t q = 0; q < count; ++q) {
    if (!have[q]) fresh.push_back(q);
  }

  std::vector<std::vector<double>> fresh_values(fresh.size());
  detail::parallel_for(fresh.size(), threads, [&](std::size_t k) {
    const ParameterPoint& p = reduced.points[fresh[k]];
    try {
      fresh_values[k] = f(p);
    } catch (const EvaluationError&) {
      throw;
    } catch (const std::exception& e) {
      throw EvaluationError(std::string("forward model failed at point ") +
                                describe_point(p) + ": " + e.what(),
                            p);
    }
  });

  if (width == 0) {
    if (fresh_values.empty()) {
      throw std::invalid_argument("evaluate_on_grid: cannot deduce QoI width");
    }
    width = fresh_values.front().size();
  }
  if (width == 0) {
    throw EvaluationError("forward model returned an empty QoI", {});
  }

  ValueTable values(count, width);
  for (std::size_t q = 0; q < count; ++q) {
    if (have[q]) {
      std::copy(recycled_rows[q].begin(), recycled_rows[q].end(), values.row(q).begin());
    }
  }
  for (std::size_t k = 0; k < fresh.size(); ++k) {
    if (fresh_values[k].size() != width) {
      throw EvaluationError("forward model returned inconsistent QoI width",
                            reduced.points[fresh[k]]);
    }
    std::copy(fresh_values[k].begin(), fresh_values[k].end(), values.row(fresh[k]).begin());
  }

  if (report != nullptr) {
    report->new_evaluations = fresh.size();
    report->recycled = recycled;
  }
  return Surrogate{std::move(grid), std::move(reduced), std::move(values)};
}

FomFunction scalar_fom(std::function<double(const ParameterPoint&)> f) {
  return [f = std::move(f)](const ParameterPoint& p) { return std::vector<double>{f(p)}; };
}

namespace {

// Barycentric weights on the reference nodes of a Clenshaw-Curtis rule.
// Working on [-1,1] keeps the products well scaled for any physical range.
class BarycentricCache {
public:
  const std::vector<double>& weights(int count) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(count);
    if (it != cache_.end()) return it->second;
    const std::vector<double> nodes = clenshaw_curtis_nodes(count, -1.0, 1.0);
    std::vector<double> w(nodes.size(), 1.0);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      for (std::size_t j = 0; j < nodes.size(); ++j) {
        if (j != k) w[k] /= (nodes[k] - nodes[j]);
      }
    }
    return cache_.emplace(count, std::move(w)).first->second;
  }

  const std::vector<double>& nodes(int count) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = node_cache_.find(count);
    if (it != node_cache_.end()) return it->second;
    return node_cache_.emplace(count, clenshaw_curtis_nodes(count, -1.0, 1.0)).first->second;
  }

private:
  std::mutex mutex_;
  std::unordered_map<int, std::vector<double>> cache_;
  std::unordered_map<int, std::vector<double>> node_cache_;
};

BarycentricCache& bary_cache() {
  static BarycentricCache cache;
  return cache;
}

// Lagrange cardinal values l_j(x) for all nodes of one rule, evaluated at
// the reference coordinate. An exact node hit returns the unit vector.
void lagrange_values(int count, double x_ref, std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(count), 0.0);
  if (count == 1) {
    out[0] = 1.0;
    return;
  }
  const auto& nodes = bary_cache().nodes(count);
  const auto& weights = bary_cache().weights(count);
  double denom = 0.0;
  for (int j = 0; j < count; ++j) {
    const double d = x_ref - nodes[static_cast<std::size_t>(j)];
    if (d == 0.0) {
      std::fill(out.begin(), out.end(), 0.0);
      out[static_cast<std::size_t>(j)] = 1.0;
      return;
    }
    const double t = weights[static_cast<std::size_t>(j)] / d;
    out[static_cast<std::size_t>(j)] = t;
    denom += t;
  }
  for (auto& v : out) v /= denom;
}

}  // namespace

ValueTable interpolate(const Surrogate& surrogate, std::span<const ParameterPoint> queries,
                       const InterpolateOptions& options) {
  const ParameterSpace& space = surrogate.grid.space();
  const std::size_t width = surrogate.values.width();
  ValueTable out(queries.size(), width);

  detail::parallel_for(queries.size(), options.threads, [&](std::size_t qi) {
    const ParameterPoint& p = queries[qi];
    if (static_cast<int>(p.size()) != space.dim()) {
      throw std::invalid_argument("interpolate: query dimension mismatch");
    }
    if (!options.allow_extrapolation && !space.contains(p)) {
      throw std::domain_error("interpolate: query outside the parameter box " +
                              describe_point(p));
    }
    const ParameterPoint ref = map_to_reference(p, space);
    auto row = out.row(qi);
    std::vector<double> cardinal;
    std::vector<std::vector<double>> per_dim;
    for (std::size_t t = 0; t < surrogate.grid.terms().size(); ++t) {
      const auto& term = surrogate.grid.terms()[t];
      per_dim.resize(term.grid.rules().size());
      for (std::size_t n = 0; n < term.grid.rules().size(); ++n) {
        lagrange_values(term.grid.rules()[n].count(), ref[n], cardinal);
        per_dim[n] = cardinal;
      }
      const auto& slots = surrogate.reduced.back_map[t];
      const std::size_t count = term.grid.point_count();
      for (std::size_t r = 0; r < count; ++r) {
        double basis = 1.0;
        const auto key = term.grid.point_key(r);
        for (std::size_t n = 0; n < key.size(); ++n) {
          basis *= per_dim[n][static_cast<std::size_t>(key[n])];
        }
        if (basis == 0.0) continue;
        const double scaled = term.coefficient * basis;
        const auto values = surrogate.values.row(slots[r]);
        for (std::size_t c = 0; c < width; ++c) row[c] += scaled * values[c];
      }
    }
  });
  return out;
}

std::vector<double> lagrange_cardinal_reference(int count, double x_ref) {
  std::vector<double> out;
  lagrange_values(count, x_ref, out);
  return out;
}

std::vector<double> quadrature(const Surrogate& surrogate) {
  const std::size_t width = surrogate.values.width();
  std::vector<double> out(width, 0.0);
  for (std::size_t q = 0; q < surrogate.reduced.size(); ++q) {
    const double alpha = surrogate.reduced.weights[q];
    const auto row = surrogate.values.row(q);
    for (std::size_t c = 0; c < width; ++c) out[c] += alpha * row[c];
  }
  return out;
}

double quadrature_scalar(const Surrogate& surrogate) {
  if (surrogate.values.width() != 1) {
    throw std::invalid_argument("quadrature_scalar: scalar QoI required");
  }
  return quadrature(surrogate)[0];
}

Surrogate extract_component(const Surrogate& surrogate, std::size_t component) {
  if (component >= surrogate.values.width()) {
    throw std::invalid_argument("extract_component: component out of range");
  }
  ValueTable values(surrogate.reduced.size(), 1);
  for (std::size_t q = 0; q < surrogate.reduced.size(); ++q) {
    values.row(q)[0] = surrogate.values.row(q)[component];
  }
  return Surrogate{surrogate.grid, surrogate.reduced, std::move(values)};
}

void save_surrogate(const Surrogate& surrogate, const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["format"] = "beamuq-surrogate";
  doc["version"] = 1;
  doc["rule"] = "clenshaw-curtis";
  doc["level_to_knots"] = "doubling";
  auto& ranges = doc["ranges"] = nlohmann::json::array();
  for (const auto& r : surrogate.grid.space().ranges()) {
    ranges.push_back({r.lower, r.upper});
  }
  auto& indices = doc["indices"] = nlohmann::json::array();
  for (const auto& idx : surrogate.grid.index_set()) indices.push_back(idx);
  doc["value_width"] = surrogate.values.width();
  doc["values"] = surrogate.values.data();

  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_surrogate: cannot open " + path.string());
  out << doc.dump(2) << "\n";
}

Surrogate load_surrogate(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_surrogate: cannot open " + path.string());
  nlohmann::json doc = nlohmann::json::parse(in);
  if (doc.value("format", "") != "beamuq-surrogate") {
    throw std::runtime_error("load_surrogate: unrecognized file format");
  }
  if (doc.value("rule", "") != "clenshaw-curtis" ||
      doc.value("level_to_knots", "") != "doubling") {
    throw std::runtime_error("load_surrogate: unsupported rule family");
  }
  std::vector<Interval> ranges;
  for (const auto& r : doc.at("ranges")) {
    ranges.push_back(Interval{r.at(0).get<double>(), r.at(1).get<double>()});
  }
  ParameterSpace space(std::move(ranges));
  std::vector<MultiIndex> indices;
  for (const auto& idx : doc.at("indices")) indices.push_back(idx.get<MultiIndex>());
  MultiIndexSet index_set(std::move(indices));

  SparseGrid grid = build_sparse_grid(space, clenshaw_curtis_families(space),
                                      level_to_knots_doubling, index_set);
  ReducedSparseGrid reduced = reduce(grid);

  const auto width = doc.at("value_width").get<std::size_t>();
  auto raw = doc.at("values").get<std::vector<double>>();
  if (width == 0 || raw.size() != reduced.size() * width) {
    throw std::runtime_error("load_surrogate: value table does not match the grid");
  }
  ValueTable values(reduced.size(), width);
  values.data() = std::move(raw);
  return Surrogate{std::move(grid), std::move(reduced), std::move(values)};
}

}  // namespace beamuq
