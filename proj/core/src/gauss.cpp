#include "beamuq/gauss.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

namespace beamuq {

namespace {

GaussRule compute_gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < (n + 1) / 2; ++k) {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (4.0 * k + 3.0) / (4.0 * n + 2.0));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(n - 1 - k)] = x;
    rule.nodes[static_cast<std::size_t>(k)] = -x;
    rule.weights[static_cast<std::size_t>(n - 1 - k)] = w;
    rule.weights[static_cast<std::size_t>(k)] = w;
  }
  if (n % 2 == 1) {
    rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    double p0 = 1.0, p1 = 0.0;
    for (int j = 2; j <= n; ++j) {
      const double p2 = (-(j - 1.0) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    // dp at 0: n * (0*p1 - p0) / (0 - 1) = n * p0
    const double dp = n * p0;
    rule.weights[static_cast<std::size_t>(n / 2)] = 2.0 / (dp * dp);
  }
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  static std::mutex mutex;
  static std::unordered_map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, compute_gauss_legendre(n)).first;
  }
  return it->second;
}

}  // namespace beamuq
