#include "beamuq/bspline.hpp"

#include <cmath>
#include <stdexcept>

namespace beamuq {

OpenKnotVector::OpenKnotVector(int degree, int basis_count, double a, double b)
    : degree_(degree), basis_count_(basis_count), a_(a), b_(b) {
  if (degree < 0) throw std::invalid_argument("OpenKnotVector: degree must be >= 0");
  if (basis_count < degree + 1) {
    throw std::invalid_argument("OpenKnotVector: basis_count must be >= degree + 1");
  }
  if (!(a < b)) throw std::invalid_argument("OpenKnotVector: need a < b");
  knots_.resize(static_cast<std::size_t>(basis_count + degree + 1));
  const int spans = basis_count - degree;
  for (int k = 0; k <= degree; ++k) {
    knots_[static_cast<std::size_t>(k)] = a;
    knots_[knots_.size() - 1 - static_cast<std::size_t>(k)] = b;
  }
  for (int k = 1; k < spans; ++k) {
    knots_[static_cast<std::size_t>(degree + k)] =
        a + (b - a) * static_cast<double>(k) / spans;
  }
}

int OpenKnotVector::find_span(double x) const {
  if (x < a_ || x > b_) throw std::domain_error("OpenKnotVector: x outside [a,b]");
  const int last = basis_count_ - 1;  // last nonempty span start index
  if (x >= knots_[static_cast<std::size_t>(last)]) return last;
  int lo = degree_, hi = last;
  while (lo + 1 < hi) {
    const int mid = (lo + hi) / 2;
    if (x < knots_[static_cast<std::size_t>(mid)]) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return (x < knots_[static_cast<std::size_t>(lo + 1)]) ? lo : hi;
}

namespace {

// Recursive Cox-de Boor value with the 0/0 = 0 convention; x == b is folded
// into the closed rightmost span.
double cox_de_boor(const std::vector<double>& knots, int i, int degree, double x, double b) {
  if (degree == 0) {
    const double left = knots[static_cast<std::size_t>(i)];
    const double right = knots[static_cast<std::size_t>(i + 1)];
    if (x >= left && x < right) return 1.0;
    if (x == b && right == b && left < right) return 1.0;
    return 0.0;
  }
  double value = 0.0;
  const double den1 = knots[static_cast<std::size_t>(i + degree)] - knots[static_cast<std::size_t>(i)];
  if (den1 != 0.0) {
    value += (x - knots[static_cast<std::size_t>(i)]) / den1 *
             cox_de_boor(knots, i, degree - 1, x, b);
  }
  const double den2 =
      knots[static_cast<std::size_t>(i + degree + 1)] - knots[static_cast<std::size_t>(i + 1)];
  if (den2 != 0.0) {
    value += (knots[static_cast<std::size_t>(i + degree + 1)] - x) / den2 *
             cox_de_boor(knots, i + 1, degree - 1, x, b);
  }
  return value;
}

// Derivative by the degree-lowering recursion, again with 0/0 = 0.
double cox_de_boor_derivative(const std::vector<double>& knots, int i, int degree, double x,
                              double b, int order) {
  if (order == 0) return cox_de_boor(knots, i, degree, x, b);
  if (degree == 0) return 0.0;
  double value = 0.0;
  const double den1 = knots[static_cast<std::size_t>(i + degree)] - knots[static_cast<std::size_t>(i)];
  if (den1 != 0.0) {
    value += cox_de_boor_derivative(knots, i, degree - 1, x, b, order - 1) / den1;
  }
  const double den2 =
      knots[static_cast<std::size_t>(i + degree + 1)] - knots[static_cast<std::size_t>(i + 1)];
  if (den2 != 0.0) {
    value -= cox_de_boor_derivative(knots, i + 1, degree - 1, x, b, order - 1) / den2;
  }
  return degree * value;
}

}  // namespace

double bspline_value(const OpenKnotVector& kv, int i, double x, int derivative_order) {
  if (i < 0 || i >= kv.basis_count()) {
    throw std::invalid_argument("bspline_value: basis index out of range");
  }
  if (derivative_order < 0 || derivative_order > kv.degree()) {
    throw std::invalid_argument("bspline_value: derivative order exceeds degree");
  }
  if (x < kv.lower() || x > kv.upper()) {
    throw std::domain_error("bspline_value: x outside [a,b]");
  }
  return cox_de_boor_derivative(kv.knots(), i, kv.degree(), x, kv.upper(), derivative_order);
}

BasisSpanValues basis_span_values(const OpenKnotVector& kv, double x, int max_derivative) {
  const int p = kv.degree();
  if (p + 1 > 8) throw std::invalid_argument("basis_span_values: degree too large");
  if (max_derivative > p) {
    throw std::invalid_argument("basis_span_values: derivative order exceeds degree");
  }
  const auto& knots = kv.knots();
  const int span = kv.find_span(x);

  // Algorithm A2.3 from the NURBS book: triangular table of basis values,
  // then derivative assembly from inverted difference quotients.
  std::vector<std::vector<double>> ndu(static_cast<std::size_t>(p + 1),
                                       std::vector<double>(static_cast<std::size_t>(p + 1)));
  std::vector<double> left(static_cast<std::size_t>(p + 1)),
      right(static_cast<std::size_t>(p + 1));
  ndu[0][0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[static_cast<std::size_t>(j)] = x - knots[static_cast<std::size_t>(span + 1 - j)];
    right[static_cast<std::size_t>(j)] = knots[static_cast<std::size_t>(span + j)] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)] =
          right[static_cast<std::size_t>(r + 1)] + left[static_cast<std::size_t>(j - r)];
      const double temp = ndu[static_cast<std::size_t>(r)][static_cast<std::size_t>(j - 1)] /
                          ndu[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)];
      ndu[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] =
          saved + right[static_cast<std::size_t>(r + 1)] * temp;
      saved = left[static_cast<std::size_t>(j - r)] * temp;
    }
    ndu[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)] = saved;
  }

  BasisSpanValues out;
  out.first_active = span - p;
  out.values.assign(static_cast<std::size_t>(max_derivative + 1), {});
  for (int j = 0; j <= p; ++j) {
    out.values[0][static_cast<std::size_t>(j)] =
        ndu[static_cast<std::size_t>(j)][static_cast<std::size_t>(p)];
  }

  std::vector<std::vector<double>> a(2, std::vector<double>(static_cast<std::size_t>(p + 1)));
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a[0][0] = 1.0;
    for (int k = 1; k <= max_derivative; ++k) {
      double d = 0.0;
      const int rk = r - k;
      const int pk = p - k;
      if (r >= k) {
        a[static_cast<std::size_t>(s2)][0] =
            a[static_cast<std::size_t>(s1)][0] /
            ndu[static_cast<std::size_t>(pk + 1)][static_cast<std::size_t>(rk)];
        d = a[static_cast<std::size_t>(s2)][0] *
            ndu[static_cast<std::size_t>(rk)][static_cast<std::size_t>(pk)];
      }
      const int j1 = (rk >= -1) ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a[static_cast<std::size_t>(s2)][static_cast<std::size_t>(j)] =
            (a[static_cast<std::size_t>(s1)][static_cast<std::size_t>(j)] -
             a[static_cast<std::size_t>(s1)][static_cast<std::size_t>(j - 1)]) /
            ndu[static_cast<std::size_t>(pk + 1)][static_cast<std::size_t>(rk + j)];
        d += a[static_cast<std::size_t>(s2)][static_cast<std::size_t>(j)] *
             ndu[static_cast<std::size_t>(rk + j)][static_cast<std::size_t>(pk)];
      }
      if (r <= pk) {
        a[static_cast<std::size_t>(s2)][static_cast<std::size_t>(k)] =
            -a[static_cast<std::size_t>(s1)][static_cast<std::size_t>(k - 1)] /
            ndu[static_cast<std::size_t>(pk + 1)][static_cast<std::size_t>(r)];
        d += a[static_cast<std::size_t>(s2)][static_cast<std::size_t>(k)] *
             ndu[static_cast<std::size_t>(r)][static_cast<std::size_t>(pk)];
      }
      out.values[static_cast<std::size_t>(k)][static_cast<std::size_t>(r)] = d;
      std::swap(s1, s2);
    }
  }

  double factor = static_cast<double>(p);
  for (int k = 1; k <= max_derivative; ++k) {
    for (int j = 0; j <= p; ++j) {
      out.values[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] *= factor;
    }
    factor *= static_cast<double>(p - k);
  }
  return out;
}

std::vector<double> greville_abscissae(const OpenKnotVector& kv) {
  const int r = kv.degree();
  if (r < 2) {
    throw std::invalid_argument("greville_abscissae: degree must be >= 2");
  }
  const auto& knots = kv.knots();
  const int n = kv.basis_count();
  std::vector<double> out(static_cast<std::size_t>(n - 1));
  for (int i = 1; i <= n - 1; ++i) {
    double sum = 0.0;
    // 1-based knots x_{i+2} .. x_{i+r} are knots[i+1] .. knots[i+r-1] here.
    for (int k = i + 1; k <= i + r - 1; ++k) {
      sum += knots[static_cast<std::size_t>(k)];
    }
    out[static_cast<std::size_t>(i - 1)] = sum / (r - 1);
  }
  return out;
}

}  // namespace beamuq
