#include "beamuq/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

#include "beamuq/gauss.hpp"

namespace beamuq {

MomentSet moments(const Surrogate& surrogate) {
  if (surrogate.values.width() != 1) {
    throw std::invalid_argument("moments: scalar QoI required");
  }
  double m1 = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (std::size_t q = 0; q < surrogate.reduced.size(); ++q) {
    const double alpha = surrogate.reduced.weights[q];
    const double v = surrogate.values.row(q)[0];
    const double v2 = v * v;
    m1 += alpha * v;
    m2 += alpha * v2;
    m3 += alpha * v2 * v;
    m4 += alpha * v2 * v2;
  }

  MomentSet out;
  out.mean = m1;
  double variance = m2 - m1 * m1;
  if (variance < -1e-8) out.inaccuracy_warning = true;
  if (variance < 0.0) variance = 0.0;
  out.variance = variance;

  // Scale-aware degeneracy guard: treat the variance as zero when it is
  // indistinguishable from rounding of E[f^2].
  const double scale = std::max(m2, m1 * m1);
  if (variance <= 1e-28 * std::max(1.0, scale) || variance == 0.0) {
    out.degenerate = true;
    return out;
  }
  const double sigma = std::sqrt(variance);
  const double mu3 = m3 - 3.0 * m1 * m2 + 2.0 * m1 * m1 * m1;
  const double mu4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1 * m1 * m1 * m1;
  out.skewness = mu3 / (sigma * sigma * sigma);
  out.kurtosis = mu4 / (variance * variance);
  return out;
}

LegendreExpansion::LegendreExpansion(ParameterSpace space,
                                     std::map<std::vector<int>, double> terms)
    : space_(std::move(space)), terms_(std::move(terms)) {}

double LegendreExpansion::mean() const {
  const std::vector<int> zero(static_cast<std::size_t>(space_.dim()), 0);
  auto it = terms_.find(zero);
  return it == terms_.end() ? 0.0 : it->second;
}

double LegendreExpansion::variance() const {
  const std::vector<int> zero(static_cast<std::size_t>(space_.dim()), 0);
  double var = 0.0;
  for (const auto& [degree, coefficient] : terms_) {
    if (degree != zero) var += coefficient * coefficient;
  }
  return var;
}

namespace {

// Orthonormal Legendre values sqrt(2d+1) P_d(x) for d = 0..max_degree.
void orthonormal_legendre(double x, int max_degree, std::vector<double>& out) {
  out.resize(static_cast<std::size_t>(max_degree) + 1);
  double p0 = 1.0, p1 = x;
  out[0] = 1.0;
  if (max_degree >= 1) out[1] = std::sqrt(3.0) * x;
  for (int d = 2; d <= max_degree; ++d) {
    const double p2 = ((2.0 * d - 1.0) * x * p1 - (d - 1.0) * p0) / d;
    out[static_cast<std::size_t>(d)] = std::sqrt(2.0 * d + 1.0) * p2;
    p0 = p1;
    p1 = p2;
  }
}

// 1D projection of the Lagrange basis onto orthonormal Legendre: the
// (d, j) entry integrates l_j against sqrt(2d+1) P_d with the uniform
// density, exactly, via a K-point Gauss rule. Depends on K only.
const std::vector<double>& projection_matrix(int count) {
  static std::mutex mutex;
  static std::unordered_map<int, std::vector<double>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(count);
  if (it != cache.end()) return it->second;

  const GaussRule& gauss = gauss_legendre(count);
  std::vector<double> matrix(static_cast<std::size_t>(count) * count, 0.0);
  std::vector<double> legendre;
  for (int g = 0; g < count; ++g) {
    const double x = gauss.nodes[static_cast<std::size_t>(g)];
    const double w = 0.5 * gauss.weights[static_cast<std::size_t>(g)];
    const std::vector<double> cardinal = lagrange_cardinal_reference(count, x);
    orthonormal_legendre(x, count - 1, legendre);
    for (int d = 0; d < count; ++d) {
      for (int j = 0; j < count; ++j) {
        matrix[static_cast<std::size_t>(d) * count + j] +=
            w * legendre[static_cast<std::size_t>(d)] * cardinal[static_cast<std::size_t>(j)];
      }
    }
  }
  return cache.emplace(count, std::move(matrix)).first->second;
}

// Applies the (K x K) matrix along one axis of a dense tensor whose first
// dimension varies slowest.
std::vector<double> transform_axis(const std::vector<double>& data,
                                   const std::vector<int>& shape, std::size_t axis,
                                   const std::vector<double>& matrix) {
  const int k = shape[axis];
  std::size_t outer = 1, inner = 1;
  for (std::size_t n = 0; n < axis; ++n) outer *= static_cast<std::size_t>(shape[n]);
  for (std::size_t n = axis + 1; n < shape.size(); ++n) {
    inner *= static_cast<std::size_t>(shape[n]);
  }
  std::vector<double> out(data.size(), 0.0);
  for (std::size_t o = 0; o < outer; ++o) {
    for (int d = 0; d < k; ++d) {
      double* dst = out.data() + (o * static_cast<std::size_t>(k) +
                                  static_cast<std::size_t>(d)) * inner;
      for (int j = 0; j < k; ++j) {
        const double m = matrix[static_cast<std::size_t>(d) * k + j];
        if (m == 0.0) continue;
        const double* src = data.data() + (o * static_cast<std::size_t>(k) +
                                           static_cast<std::size_t>(j)) * inner;
        for (std::size_t i = 0; i < inner; ++i) dst[i] += m * src[i];
      }
    }
  }
  return out;
}

}  // namespace

LegendreExpansion to_legendre(const Surrogate& surrogate) {
  if (surrogate.values.width() != 1) {
    throw std::invalid_argument("to_legendre: scalar QoI required");
  }
  const int dim = surrogate.grid.space().dim();
  std::map<std::vector<int>, double> accumulated;

  for (std::size_t t = 0; t < surrogate.grid.terms().size(); ++t) {
    const auto& term = surrogate.grid.terms()[t];
    std::vector<int> shape(static_cast<std::size_t>(dim));
    for (int n = 0; n < dim; ++n) {
      shape[static_cast<std::size_t>(n)] = term.grid.rules()[static_cast<std::size_t>(n)].count();
    }

    std::vector<double> tensor(term.grid.point_count());
    const auto& slots = surrogate.reduced.back_map[t];
    for (std::size_t r = 0; r < tensor.size(); ++r) {
      tensor[r] = surrogate.values.row(slots[r])[0];
    }
    for (std::size_t n = 0; n < static_cast<std::size_t>(dim); ++n) {
      tensor = transform_axis(tensor, shape, n,
                              projection_matrix(shape[n]));
    }

    // Scatter the per-term coefficient tensor into the global map.
    std::vector<int> degree(static_cast<std::size_t>(dim), 0);
    for (std::size_t r = 0; r < tensor.size(); ++r) {
      accumulated[degree] += term.coefficient * tensor[r];
      for (std::size_t n = degree.size(); n-- > 0;) {
        if (++degree[n] < shape[n]) break;
        degree[n] = 0;
      }
    }
  }

  // Drop exact zeros produced by cancellation between terms.
  std::map<std::vector<int>, double> cleaned;
  for (auto& [degree, coefficient] : accumulated) {
    if (coefficient != 0.0) cleaned.emplace(degree, coefficient);
  }
  return LegendreExpansion(surrogate.grid.space(), std::move(cleaned));
}

double LegendreExpansion::evaluate(std::span<const double> point) const {
  if (static_cast<int>(point.size()) != space_.dim()) {
    throw std::invalid_argument("LegendreExpansion::evaluate: dimension mismatch");
  }
  int max_degree = 0;
  for (const auto& [degree, coefficient] : terms_) {
    for (int d : degree) max_degree = std::max(max_degree, d);
  }
  const ParameterPoint ref = map_to_reference(point, space_);
  std::vector<std::vector<double>> basis(point.size());
  for (std::size_t n = 0; n < point.size(); ++n) {
    orthonormal_legendre(ref[n], max_degree, basis[n]);
  }
  double value = 0.0;
  for (const auto& [degree, coefficient] : terms_) {
    double product = coefficient;
    for (std::size_t n = 0; n < degree.size(); ++n) {
      product *= basis[n][static_cast<std::size_t>(degree[n])];
    }
    value += product;
  }
  return value;
}

SobolIndices sobol_indices(const LegendreExpansion& expansion) {
  const int dim = expansion.space().dim();
  const double variance = expansion.variance();
  // Variance at the rounding floor of the coefficients is indistinguishable
  // from zero; the decomposition would only split noise.
  const double mean = expansion.mean();
  if (!(variance > 1e-28 * std::max(1.0, mean * mean))) {
    throw std::invalid_argument("sobol_indices: expansion has (numerically) zero variance");
  }
  SobolIndices out;
  out.principal.assign(static_cast<std::size_t>(dim), 0.0);
  out.total.assign(static_cast<std::size_t>(dim), 0.0);
  for (const auto& [degree, coefficient] : expansion.terms()) {
    int active = -1;
    int active_count = 0;
    for (int n = 0; n < dim; ++n) {
      if (degree[static_cast<std::size_t>(n)] != 0) {
        active = n;
        ++active_count;
      }
    }
    if (active_count == 0) continue;
    const double c2 = coefficient * coefficient;
    if (active_count == 1) out.principal[static_cast<std::size_t>(active)] += c2;
    for (int n = 0; n < dim; ++n) {
      if (degree[static_cast<std::size_t>(n)] != 0) {
        out.total[static_cast<std::size_t>(n)] += c2;
      }
    }
  }
  for (auto& v : out.principal) v /= variance;
  for (auto& v : out.total) v /= variance;
  return out;
}

namespace {

double sample_sd(std::span<const double> x) {
  const std::size_t n = x.size();
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

double quantile_sorted(std::span<const double> sorted, double p) {
  const std::size_t n = sorted.size();
  const double h = p * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double silverman_bandwidth(std::span<const double> samples) {
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double sd = sample_sd(sorted);
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (spread <= 0.0) spread = std::max(sd, iqr / 1.34);
  if (spread <= 0.0) {
    throw std::invalid_argument("kde_pdf: degenerate sample (no spread)");
  }
  return 0.9 * spread * std::pow(static_cast<double>(samples.size()), -0.2);
}

std::vector<double> gaussian_kde(std::span<const double> samples, double bandwidth,
                                 std::span<const double> eval_points) {
  const double norm = 1.0 /
      (static_cast<double>(samples.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> out(eval_points.size(), 0.0);
  for (std::size_t i = 0; i < eval_points.size(); ++i) {
    double acc = 0.0;
    for (double s : samples) {
      const double z = (eval_points[i] - s) / bandwidth;
      acc += std::exp(-0.5 * z * z);
    }
    out[i] = norm * acc;
  }
  return out;
}

}  // namespace

std::vector<double> kde_pdf(std::span<const double> samples, KdeSupport support,
                            std::span<const double> eval_points) {
  if (samples.size() < 2) {
    throw std::invalid_argument("kde_pdf: at least two samples required");
  }
  const double first = samples.front();
  bool all_identical = true;
  for (double s : samples) {
    if (s != first) {
      all_identical = false;
      break;
    }
  }
  if (all_identical) throw std::invalid_argument("kde_pdf: all samples identical");

  if (support == KdeSupport::unbounded) {
    return gaussian_kde(samples, silverman_bandwidth(samples), eval_points);
  }

  // Positive support: estimate the density of log(f) and pull it back with
  // the Jacobian 1/x.
  std::vector<double> logs(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!(samples[i] > 0.0)) {
      throw std::invalid_argument("kde_pdf: positive support requires positive samples");
    }
    logs[i] = std::log(samples[i]);
  }
  const double bandwidth = silverman_bandwidth(logs);
  std::vector<double> out(eval_points.size(), 0.0);
  std::vector<double> positive_eval;
  std::vector<std::size_t> positions;
  for (std::size_t i = 0; i < eval_points.size(); ++i) {
    if (eval_points[i] > 0.0) {
      positive_eval.push_back(std::log(eval_points[i]));
      positions.push_back(i);
    }
  }
  const std::vector<double> log_density = gaussian_kde(logs, bandwidth, positive_eval);
  for (std::size_t k = 0; k < positions.size(); ++k) {
    out[positions[k]] = log_density[k] / eval_points[positions[k]];
  }
  return out;
}

void write_pdf_csv(const std::filesystem::path& path, std::span<const double> eval_points,
                   std::span<const double> densities) {
  if (eval_points.size() != densities.size()) {
    throw std::invalid_argument("write_pdf_csv: length mismatch");
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_pdf_csv: cannot open " + path.string());
  out << "point,density\n";
  char buffer[80];
  for (std::size_t i = 0; i < eval_points.size(); ++i) {
    std::snprintf(buffer, sizeof(buffer), "%.17g,%.17g\n", eval_points[i], densities[i]);
    out << buffer;
  }
}

}  // namespace beamuq
