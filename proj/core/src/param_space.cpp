#include "beamuq/param_space.hpp"

#include <random>
#include <stdexcept>

namespace beamuq {

ParameterSpace::ParameterSpace(std::vector<Interval> ranges) : ranges_(std::move(ranges)) {
  if (ranges_.empty()) {
    throw std::invalid_argument("ParameterSpace: at least one parameter required");
  }
  for (const auto& r : ranges_) {
    if (!(r.lower < r.upper)) {
      throw std::invalid_argument("ParameterSpace: every range needs lower < upper");
    }
  }
}

bool ParameterSpace::contains(std::span<const double> point) const {
  if (point.size() != ranges_.size()) return false;
  for (std::size_t n = 0; n < ranges_.size(); ++n) {
    if (!ranges_[n].contains(point[n])) return false;
  }
  return true;
}

double ParameterSpace::density(std::span<const double> point) const {
  if (!contains(point)) return 0.0;
  double d = 1.0;
  for (const auto& r : ranges_) d /= r.length();
  return d;
}

namespace {

// 53-bit uniform draw in [0,1); fully determined by the mt19937_64 stream.
inline double unit_draw(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::vector<ParameterPoint> sample_uniform(const ParameterSpace& space,
                                           std::size_t count,
                                           std::uint64_t seed) {
  if (count == 0) {
    throw std::invalid_argument("sample_uniform: count must be >= 1");
  }
  std::mt19937_64 eng(seed);
  const int dim = space.dim();
  std::vector<ParameterPoint> out(count);
  for (auto& p : out) {
    p.resize(static_cast<std::size_t>(dim));
    for (int n = 0; n < dim; ++n) {
      const Interval& r = space.range(n);
      p[static_cast<std::size_t>(n)] = r.lower + r.length() * unit_draw(eng);
    }
  }
  return out;
}

ParameterPoint map_affine(std::span<const double> reference_point, const ParameterSpace& space) {
  if (static_cast<int>(reference_point.size()) != space.dim()) {
    throw std::invalid_argument("map_affine: dimension mismatch");
  }
  ParameterPoint out(reference_point.size());
  for (std::size_t n = 0; n < reference_point.size(); ++n) {
    const double x = reference_point[n];
    if (x < -1.0 || x > 1.0) {
      throw std::domain_error("map_affine: reference coordinate outside [-1,1]");
    }
    const Interval& r = space.range(static_cast<int>(n));
    out[n] = r.lower + r.length() * (x + 1.0) * 0.5;
  }
  return out;
}

ParameterPoint map_to_reference(std::span<const double> physical_point,
                                const ParameterSpace& space) {
  if (static_cast<int>(physical_point.size()) != space.dim()) {
    throw std::invalid_argument("map_to_reference: dimension mismatch");
  }
  ParameterPoint out(physical_point.size());
  for (std::size_t n = 0; n < physical_point.size(); ++n) {
    const Interval& r = space.range(static_cast<int>(n));
    out[n] = 2.0 * (physical_point[n] - r.lower) / r.length() - 1.0;
  }
  return out;
}

}  // namespace beamuq
