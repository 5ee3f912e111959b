#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "beamuq/sparse_grid.hpp"

namespace beamuq {

struct MomentSet {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;  // non-excess: a normal law gives 3
  //! Set when the variance vanishes and the standardized moments are
  //! meaningless (constant QoI).
  bool degenerate = false;
  //! Set when the raw variance came out below -1e-8, i.e. the grid is too
  //! coarse for f^2; the reported variance is clamped to zero.
  bool inaccuracy_warning = false;
};

//! Mean, variance, skewness, kurtosis of a scalar surrogate. Powers of f
//! are integrated on the same grid by reusing the stored nodal values.
MomentSet moments(const Surrogate& surrogate);

//! Expansion in tensorized Legendre polynomials, orthonormal with respect
//! to the uniform density on the parameter box. The zero-degree term is the
//! mean; the squared non-constant coefficients sum to the variance.
class LegendreExpansion {
public:
  LegendreExpansion(ParameterSpace space, std::map<std::vector<int>, double> terms);

  const ParameterSpace& space() const { return space_; }
  const std::map<std::vector<int>, double>& terms() const { return terms_; }

  double mean() const;
  double variance() const;
  double evaluate(std::span<const double> point) const;

private:
  ParameterSpace space_;
  std::map<std::vector<int>, double> terms_;
};

//! Exact re-expansion of the combination-technique interpolant: each tensor
//! term is projected onto Legendre polynomials by Gauss quadrature of
//! sufficient degree and the projections are summed with the combination
//! coefficients.
LegendreExpansion to_legendre(const Surrogate& surrogate);

struct SobolIndices {
  std::vector<double> principal;
  std::vector<double> total;
};

//! Variance-based global sensitivity indices read off the expansion:
//! principal_n collects squared coefficients active in dimension n only,
//! total_n those active in dimension n at all.
SobolIndices sobol_indices(const LegendreExpansion& expansion);

enum class KdeSupport { unbounded, positive };

//! Gaussian-kernel density estimate with Silverman's bandwidth
//! 0.9 min(sd, IQR/1.34) M^(-1/5). Positive support is handled by a log
//! transform with Jacobian correction.
std::vector<double> kde_pdf(std::span<const double> samples, KdeSupport support,
                            std::span<const double> eval_points);

//! Two-column CSV (eval point, density).
void write_pdf_csv(const std::filesystem::path& path,
                   std::span<const double> eval_points,
                   std::span<const double> densities);

}  // namespace beamuq
