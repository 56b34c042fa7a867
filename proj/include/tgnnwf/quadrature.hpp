#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tgnnwf/array.hpp"

namespace tgnnwf {

// 1-D Gauss-Legendre rule on [-1, 1]. Nodes and weights are exactly
// symmetric about 0.
struct QuadRule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
  int n() const { return static_cast<int>(nodes.size()); }
};

QuadRule1D gauss_legendre(int n);

// One space-time collocation region: center plus half-lengths per dimension,
// in physical units.
struct Subdomain {
  std::vector<double> center;
  std::vector<double> half;
  int dim() const { return static_cast<int>(center.size()); }
};

// Tensor-product rule mapped onto a region. Points are row-major (count x
// dim), ordered with the last dimension fastest; weights carry the affine
// Jacobian (product of half-lengths).
struct TensorRule {
  Array points;
  std::vector<double> weights;
  int count() const { return points.rows(); }
};

TensorRule tensor_rule(const std::vector<QuadRule1D>& per_dim, const Subdomain& region);

// Latin hypercube sample: n points, one per stratum per dimension,
// deterministic per seed. Returns n x dim.
Array latin_hypercube(int n, const std::vector<std::pair<double, double>>& bounds,
                      std::uint64_t seed);

}  // namespace tgnnwf
