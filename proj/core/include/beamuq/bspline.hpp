#pragma once

#include <array>
#include <vector>

namespace beamuq {

//! Open knot vector with uniformly spaced interior breakpoints: the end
//! knots repeat degree+1 times, making the basis interpolatory at both
//! interval ends. Sequence length is basis_count + degree + 1.
class OpenKnotVector {
public:
  OpenKnotVector(int degree, int basis_count, double a, double b);

  int degree() const { return degree_; }
  int basis_count() const { return basis_count_; }
  double lower() const { return a_; }
  double upper() const { return b_; }
  int span_count() const { return basis_count_ - degree_; }
  const std::vector<double>& knots() const { return knots_; }

  //! Index of the knot span containing x, with x == b folded into the last
  //! nonempty span (right-end convention).
  int find_span(double x) const;

private:
  int degree_;
  int basis_count_;
  double a_, b_;
  std::vector<double> knots_;
};

//! Single basis function N_i (or derivative) at x, by the Cox-de Boor
//! recursion with the 0/0 = 0 convention. The last basis function
//! evaluates to one at x == b.
double bspline_value(const OpenKnotVector& kv, int i, double x, int derivative_order);

//! Values and derivatives up to `max_derivative` of the degree+1 basis
//! functions active on the span of x. row d holds the d-th derivatives;
//! column k belongs to basis index first_active + k.
struct BasisSpanValues {
  int first_active = 0;
  // [derivative][local basis], sized (max_derivative+1) x (degree+1)
  std::vector<std::array<double, 8>> values;
};

BasisSpanValues basis_span_values(const OpenKnotVector& kv, double x, int max_derivative);

//! Collocation abscissae: averages of degree-1 consecutive interior knots,
//! x_hat_i = (x_{i+2} + ... + x_{i+degree})/(degree-1) for i = 1..basis_count-1
//! in 1-based knot numbering. Requires degree >= 2; returns basis_count-1
//! values, which for open vectors include both interval ends.
std::vector<double> greville_abscissae(const OpenKnotVector& kv);

}  // namespace beamuq
