#pragma once

#include <vector>

namespace beamuq {

struct GaussRule {
  std::vector<double> nodes;    // on [-1,1], ascending
  std::vector<double> weights;  // sum to 2
};

//! n-point Gauss-Legendre rule on [-1,1]; exact for degree <= 2n-1.
//! Results are cached per n and safe to request from several threads.
const GaussRule& gauss_legendre(int n);

}  // namespace beamuq
