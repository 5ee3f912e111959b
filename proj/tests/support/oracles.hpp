#pragma once

#include <map>
#include <span>
#include <vector>

#include "beamuq/multi_index.hpp"
#include "beamuq/param_space.hpp"
#include "beamuq/sparse_grid.hpp"

namespace beamuq::testing {

//! Analytic moment of the uniform density: E[x^d] on [a,b].
double uniform_moment(int degree, double a, double b);

//! Independent combination-coefficient oracle: expands the telescoping sum
//! of tensor differences and reads coefficients off the surviving terms.
std::map<MultiIndex, int> telescoping_coefficients(const MultiIndexSet& set);

//! Independent grid-size oracle: enumerates the union of tensor grids of a
//! Smolyak set using integer dyadic node labels, no floating point.
std::size_t enumerate_unique_points(const MultiIndexSet& set);

//! Brute-force combination-technique interpolant: direct product-form
//! Lagrange polynomials summed per term with the combination coefficients.
double brute_force_interpolate(const Surrogate& surrogate, const ParameterPoint& p);

//! Adaptive Simpson quadrature of a scalar function on [a,b].
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tolerance);

//! Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::span<const double> a, std::span<const double> b);

//! Weights of a K-point rule on [a,b] solved from the Chebyshev moment
//! system by Gaussian elimination; independent of the production path.
std::vector<double> moment_matched_weights(std::span<const double> nodes, double a, double b);

}  // namespace beamuq::testing
