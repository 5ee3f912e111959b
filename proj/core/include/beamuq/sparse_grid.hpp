#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "beamuq/multi_index.hpp"
#include "beamuq/param_space.hpp"
#include "beamuq/univariate_rules.hpp"

namespace beamuq {

//! Cartesian-product grid of one multi-index: rule n holds m(i_n) nodes.
//! Points are enumerated on demand in mixed-radix order (first dimension
//! slowest) rather than stored.
class TensorGrid {
public:
  TensorGrid(MultiIndex index, std::vector<UnivariateRule> rules);

  const MultiIndex& index() const { return index_; }
  const std::vector<UnivariateRule>& rules() const { return rules_; }
  int dim() const { return static_cast<int>(rules_.size()); }

  std::size_t point_count() const { return point_count_; }
  ParameterPoint point(std::size_t rank) const;
  double weight(std::size_t rank) const;
  //! Per-dimension node indices of the point with the given rank.
  std::vector<int> point_key(std::size_t rank) const;

private:
  MultiIndex index_;
  std::vector<UnivariateRule> rules_;
  std::vector<std::size_t> strides_;
  std::size_t point_count_ = 0;
};

struct SparseGridTerm {
  MultiIndex index;
  int coefficient = 0;  // never stored when zero
  TensorGrid grid;
};

//! Combination-technique grid: signed tensor terms sharing one space.
class SparseGrid {
public:
  SparseGrid(ParameterSpace space, std::vector<SparseGridTerm> terms,
             MultiIndexSet index_set);

  const ParameterSpace& space() const { return space_; }
  const std::vector<SparseGridTerm>& terms() const { return terms_; }
  const MultiIndexSet& index_set() const { return index_set_; }

private:
  ParameterSpace space_;
  std::vector<SparseGridTerm> terms_;
  MultiIndexSet index_set_;
};

//! Builds the sparse grid for a downward-closed index set: computes the
//! combination coefficients and instantiates tensor grids for the nonzero
//! ones only.
SparseGrid build_sparse_grid(const ParameterSpace& space,
                             const std::vector<FamilyPtr>& families,
                             const LevelToKnots& level_to_knots,
                             const MultiIndexSet& index_set);

//! Deduplicated sparse-grid points with combined quadrature weights.
//!
//! Point identity is exact equality of canonicalized coordinates, which the
//! nested Clenshaw-Curtis construction guarantees across levels. back_map
//! links every tensor-grid point (term t, rank r) to its row in points.
struct ReducedSparseGrid {
  std::vector<ParameterPoint> points;
  std::vector<double> weights;
  std::vector<std::vector<std::uint32_t>> back_map;

  std::size_t size() const { return points.size(); }
};

ReducedSparseGrid reduce(const SparseGrid& grid);

//! Dense table of QoI values, one fixed-width row per grid point.
class ValueTable {
public:
  ValueTable() = default;
  ValueTable(std::size_t rows, std::size_t width)
      : width_(width), data_(rows * width, 0.0) {}

  std::size_t rows() const { return width_ == 0 ? 0 : data_.size() / width_; }
  std::size_t width() const { return width_; }

  std::span<double> row(std::size_t q) { return {data_.data() + q * width_, width_}; }
  std::span<const double> row(std::size_t q) const {
    return {data_.data() + q * width_, width_};
  }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

private:
  std::size_t width_ = 0;
  std::vector<double> data_;
};

//! A sparse grid together with the QoI values at its unique points.
struct Surrogate {
  SparseGrid grid;
  ReducedSparseGrid reduced;
  ValueTable values;
};

//! Black-box forward model: parameter point to (possibly vector) QoI.
using FomFunction = std::function<std::vector<double>(const ParameterPoint&)>;

//! Forward-model failure carrying the offending parameter point.
class EvaluationError : public std::runtime_error {
public:
  EvaluationError(const std::string& what, ParameterPoint point);
  const ParameterPoint& point() const { return point_; }

private:
  ParameterPoint point_;
};

struct EvaluationReport {
  std::size_t new_evaluations = 0;
  std::size_t recycled = 0;
};

//! Evaluates f at every unique grid point, recycling values stored in
//! `recycle_from` for points the two grids share (its points must be a
//! subset of the new grid's; nested families guarantee that between
//! levels). Evaluations may run on `threads` workers; results are placed
//! by point index, so the outcome does not depend on scheduling.
Surrogate evaluate_on_grid(const FomFunction& f, SparseGrid grid,
                           ReducedSparseGrid reduced,
                           const Surrogate* recycle_from = nullptr,
                           int threads = 1,
                           EvaluationReport* report = nullptr);

//! Convenience wrapper for scalar quantities of interest.
FomFunction scalar_fom(std::function<double(const ParameterPoint&)> f);

struct InterpolateOptions {
  //! Queries outside the parameter box throw std::domain_error unless
  //! extrapolation is explicitly allowed.
  bool allow_extrapolation = false;
  int threads = 1;
};

//! Evaluates the combination-technique interpolant at the query points:
//! sum_i c_i times the tensor Lagrange interpolant of term i. Univariate
//! factors use the barycentric form on the reference interval.
ValueTable interpolate(const Surrogate& surrogate,
                       std::span<const ParameterPoint> queries,
                       const InterpolateOptions& options = {});

//! Sparse quadrature sum_q alpha_q f(q), componentwise for vector QoI.
std::vector<double> quadrature(const Surrogate& surrogate);
double quadrature_scalar(const Surrogate& surrogate);

//! Scalar surrogate for one component of a vector-valued one; shares the
//! grid, copies the selected value column.
Surrogate extract_component(const Surrogate& surrogate, std::size_t component);

//! Lagrange cardinal values of the `count`-node Clenshaw-Curtis rule on the
//! reference interval [-1,1], evaluated at x_ref via the barycentric form.
//! An exact node hit yields the corresponding unit vector.
std::vector<double> lagrange_cardinal_reference(int count, double x_ref);

//! JSON (de)serialization of surrogates: parameter ranges, index set and
//! stored values; grids are rebuilt deterministically on load.
void save_surrogate(const Surrogate& surrogate, const std::filesystem::path& path);
Surrogate load_surrogate(const std::filesystem::path& path);

}  // namespace beamuq
