#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "beamuq/param_space.hpp"

namespace beamuq {

//! One-dimensional interpolation/quadrature rule on an interval [a,b].
//!
//! Weights are probabilistic: they absorb the uniform density 1/(b-a), so
//! they sum to one and quadrature approximates expectations directly.
//! Nodes follow the generating formula's ordering (decreasing from b to a
//! for Clenshaw-Curtis).
struct UnivariateRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  double lower = -1.0;
  double upper = 1.0;
  bool nested = false;

  int count() const { return static_cast<int>(nodes.size()); }
};

//! Clenshaw-Curtis nodes cos((j-1)pi/(K-1)), j=1..K, mapped to [a,b].
//! K=1 degenerates to the single midpoint node.
//! Nodes shared between nested levels are bit-identical; values within
//! 1e-15 of the interval midpoint are snapped onto it exactly.
std::vector<double> clenshaw_curtis_nodes(int count, double a, double b);

//! Probabilistic Clenshaw-Curtis weights for the uniform density on [a,b];
//! exact for polynomials of degree <= count-1.
std::vector<double> clenshaw_curtis_weights(int count, double a, double b);

UnivariateRule clenshaw_curtis_rule(int count, double a, double b);

//! Level-to-knots map: 1 -> 1, k -> 2^(k-1)+1. Doubling keeps
//! Clenshaw-Curtis families nested across levels.
int level_to_knots_doubling(int level);

using LevelToKnots = std::function<int(int)>;

//! Family of rules of one kind on a fixed interval, one rule per node count.
class UnivariateFamily {
public:
  virtual ~UnivariateFamily() = default;
  virtual UnivariateRule rule(int count) const = 0;
  virtual Interval interval() const = 0;
};

class ClenshawCurtisFamily final : public UnivariateFamily {
public:
  ClenshawCurtisFamily(double a, double b) : interval_{a, b} {}
  explicit ClenshawCurtisFamily(Interval iv) : interval_(iv) {}

  UnivariateRule rule(int count) const override {
    return clenshaw_curtis_rule(count, interval_.lower, interval_.upper);
  }
  Interval interval() const override { return interval_; }

private:
  Interval interval_;
};

using FamilyPtr = std::shared_ptr<const UnivariateFamily>;

//! One Clenshaw-Curtis family per dimension of the space.
std::vector<FamilyPtr> clenshaw_curtis_families(const ParameterSpace& space);

}  // namespace beamuq
