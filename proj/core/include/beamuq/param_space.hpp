#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace beamuq {

//! A point in parameter space, one coordinate per uncertain parameter.
using ParameterPoint = std::vector<double>;

struct Interval {
  double lower = 0.0;
  double upper = 1.0;

  double length() const { return upper - lower; }
  double midpoint() const { return 0.5 * (lower + upper); }
  bool contains(double x) const { return x >= lower && x <= upper; }
};

//! Hyperrectangle of independent uniformly distributed parameters.
//!
//! Immutable after construction; the joint density is the product of the
//! uniform marginal densities and integrates to one over the box.
class ParameterSpace {
public:
  explicit ParameterSpace(std::vector<Interval> ranges);

  int dim() const { return static_cast<int>(ranges_.size()); }
  const Interval& range(int n) const { return ranges_.at(static_cast<std::size_t>(n)); }
  const std::vector<Interval>& ranges() const { return ranges_; }

  bool contains(std::span<const double> point) const;

  //! Joint probability density: constant inside the box, zero outside.
  double density(std::span<const double> point) const;

private:
  std::vector<Interval> ranges_;
};

//! Draws `count` independent samples from the product uniform density.
//! The same seed always reproduces the identical sequence bit for bit.
std::vector<ParameterPoint> sample_uniform(const ParameterSpace& space,
                                           std::size_t count,
                                           std::uint64_t seed);

//! Maps a point of the reference cube [-1,1]^N onto the physical box,
//! coordinate-wise: x -> a + (b-a)(x+1)/2.
//! Throws std::domain_error if any coordinate leaves [-1,1].
ParameterPoint map_affine(std::span<const double> reference_point,
                          const ParameterSpace& space);

//! Inverse of map_affine: physical coordinates back to [-1,1]^N.
ParameterPoint map_to_reference(std::span<const double> physical_point,
                                const ParameterSpace& space);

}  // namespace beamuq
