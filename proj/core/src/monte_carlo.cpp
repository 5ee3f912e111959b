#include "beamuq/monte_carlo.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "parallel_util.hpp"

namespace beamuq {

McEstimate mc_expectation(const std::function<double(const ParameterPoint&)>& f,
                          const ParameterSpace& space, std::size_t samples,
                          std::uint64_t seed, int threads) {
  if (samples < 2) throw std::invalid_argument("mc_expectation: need at least 2 samples");

  const auto points = sample_uniform(space, samples, seed);
  std::vector<double> values(samples, 0.0);
  detail::parallel_for(samples, threads,
                       [&](std::size_t i) { values[i] = f(points[i]); });

  // Single-pass Welford in fixed sample order.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double delta = values[i] - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (values[i] - mean);
  }
  const double sample_variance = m2 / static_cast<double>(samples - 1);

  McEstimate estimate;
  estimate.mean = mean;
  estimate.standard_error =
      std::sqrt(std::max(0.0, sample_variance) / static_cast<double>(samples));
  estimate.sample_count = samples;
  estimate.seed = seed;
  return estimate;
}

}  // namespace beamuq
