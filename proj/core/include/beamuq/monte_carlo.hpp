#pragma once

#include <cstdint>
#include <functional>

#include "beamuq/param_space.hpp"

namespace beamuq {

struct McEstimate {
  double mean = 0.0;
  double standard_error = 0.0;  // sample standard deviation / sqrt(count)
  std::size_t sample_count = 0;
  std::uint64_t seed = 0;
};

//! Plain Monte Carlo estimate of E[f] over the uniform parameter box.
//! Sample points come from a single seeded stream; evaluations may run on
//! several threads, but the Welford accumulation follows sample order, so
//! the estimate is identical for any thread count.
McEstimate mc_expectation(const std::function<double(const ParameterPoint&)>& f,
                          const ParameterSpace& space, std::size_t samples,
                          std::uint64_t seed, int threads = 1);

}  // namespace beamuq
