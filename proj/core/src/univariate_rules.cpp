#include "beamuq/univariate_rules.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace beamuq {

namespace {

// Reference nodes on [-1,1], symmetrized in exact arithmetic so that
// x_j == -x_{K+1-j} and the center node of odd rules is exactly zero.
// Cosine arguments of nested levels share the same dyadic fraction and
// therefore produce bit-identical node values across levels.
std::vector<double> reference_nodes(int count) {
  if (count == 1) return {0.0};
  const int n = count - 1;
  std::vector<double> x(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) {
    x[static_cast<std::size_t>(j)] =
        std::cos(static_cast<double>(j) * std::numbers::pi / n);
  }
  for (int j = 0; 2 * j < count; ++j) {
    const int k = count - 1 - j;
    const double s = 0.5 * (x[static_cast<std::size_t>(j)] - x[static_cast<std::size_t>(k)]);
    x[static_cast<std::size_t>(j)] = s;
    x[static_cast<std::size_t>(k)] = -s;
  }
  for (auto& v : x) {
    if (std::abs(v) < 1e-15) v = 0.0;
  }
  return x;
}

}  // namespace

std::vector<double> clenshaw_curtis_nodes(int count, double a, double b) {
  if (count < 1) throw std::invalid_argument("clenshaw_curtis_nodes: count must be >= 1");
  if (!(a < b)) throw std::invalid_argument("clenshaw_curtis_nodes: need a < b");
  std::vector<double> nodes = reference_nodes(count);
  for (auto& x : nodes) {
    x = a + (b - a) * (x + 1.0) * 0.5;
  }
  return nodes;
}

std::vector<double> clenshaw_curtis_weights(int count, double a, double b) {
  if (count < 1) throw std::invalid_argument("clenshaw_curtis_weights: count must be >= 1");
  if (!(a < b)) throw std::invalid_argument("clenshaw_curtis_weights: need a < b");
  if (count == 1) return {1.0};

  // Chebyshev moment matching through the DCT-I inverse: the weights solve
  // sum_j cos(i theta_j) w_j = mu_i with mu_i the uniform-density moments
  // of T_i on [-1,1] (mu_0 = 1, mu_i = 1/(1-i^2) for even i, 0 for odd i).
  const int n = count - 1;
  std::vector<double> mu(static_cast<std::size_t>(count), 0.0);
  mu[0] = 1.0;
  for (int i = 2; i <= n; i += 2) {
    mu[static_cast<std::size_t>(i)] = 1.0 / (1.0 - static_cast<double>(i) * i);
  }
  std::vector<double> w(static_cast<std::size_t>(count));
  for (int j = 0; j <= n; ++j) {
    const double dj = (j == 0 || j == n) ? 0.5 : 1.0;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double di = (i == 0 || i == n) ? 0.5 : 1.0;
      const double theta = static_cast<double>(i) * static_cast<double>(j) *
                           std::numbers::pi / n;
      acc += di * mu[static_cast<std::size_t>(i)] * std::cos(theta);
    }
    w[static_cast<std::size_t>(j)] = 2.0 * dj * acc / n;
  }
  // Symmetrize: mirrored nodes carry identical weights.
  for (int j = 0; 2 * j < count; ++j) {
    const int k = count - 1 - j;
    const double s = 0.5 * (w[static_cast<std::size_t>(j)] + w[static_cast<std::size_t>(k)]);
    w[static_cast<std::size_t>(j)] = s;
    w[static_cast<std::size_t>(k)] = s;
  }
  return w;
}

UnivariateRule clenshaw_curtis_rule(int count, double a, double b) {
  UnivariateRule rule;
  rule.nodes = clenshaw_curtis_nodes(count, a, b);
  rule.weights = clenshaw_curtis_weights(count, a, b);
  rule.lower = a;
  rule.upper = b;
  rule.nested = true;
  return rule;
}

int level_to_knots_doubling(int level) {
  if (level < 1) throw std::invalid_argument("level_to_knots_doubling: level must be >= 1");
  if (level == 1) return 1;
  return (1 << (level - 1)) + 1;
}

std::vector<FamilyPtr> clenshaw_curtis_families(const ParameterSpace& space) {
  std::vector<FamilyPtr> families;
  families.reserve(static_cast<std::size_t>(space.dim()));
  for (int n = 0; n < space.dim(); ++n) {
    families.push_back(std::make_shared<ClenshawCurtisFamily>(space.range(n)));
  }
  return families;
}

}  // namespace beamuq
