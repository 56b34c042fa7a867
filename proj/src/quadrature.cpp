#include "tgnnwf/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "tgnnwf/rng.hpp"

namespace tgnnwf {

namespace {

// P_n(x) and P_n'(x) by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  const double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

}  // namespace

QuadRule1D gauss_legendre(int n) {
  if (n < 1 || n > 64) throw std::invalid_argument("gauss_legendre: n out of range [1,64]");
  QuadRule1D rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 1; i <= half; ++i) {
    const bool center = (2 * i - 1 == n);  // middle node of an odd rule
    double z, dp;
    if (center) {
      // P_n(0) = 0 for odd n; take the derivative from the recurrence at 0.
      z = 0.0;
      double p0 = 1.0, p1 = 0.0, d0 = 0.0, d1 = 1.0;
      for (int k = 2; k <= n; ++k) {
        const double p2 = (-(k - 1.0) * p0) / k;
        const double d2 = ((2.0 * k - 1.0) * p1 - (k - 1.0) * d0) / k;
        p0 = p1; p1 = p2; d0 = d1; d1 = d2;
      }
      dp = d1;
    } else {
      // Newton with the Chebyshev-like initial guess.
      z = std::cos(std::numbers::pi * (i - 0.25) / (n + 0.5));
      dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        const auto [p, d] = legendre(n, z);
        const double dz = p / d;
        z -= dz;
        dp = d;
        if (std::fabs(dz) <= 1e-15) break;
      }
      dp = legendre(n, z).second;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    // mirror across 0 for exact symmetry
    rule.nodes[i - 1] = center ? 0.0 : -std::fabs(z);
    rule.nodes[n - i] = std::fabs(z);
    rule.weights[i - 1] = w;
    rule.weights[n - i] = w;
  }
  return rule;
}

TensorRule tensor_rule(const std::vector<QuadRule1D>& per_dim, const Subdomain& region) {
  const int d = region.dim();
  if (static_cast<int>(per_dim.size()) != d)
    throw std::invalid_argument("tensor_rule: rule count does not match region dimension");
  int count = 1;
  double jac = 1.0;
  for (int k = 0; k < d; ++k) {
    count *= per_dim[k].n();
    jac *= region.half[k];
  }
  TensorRule out;
  out.points = Array::uninit(count, d);
  out.weights.assign(count, 0.0);
  std::vector<int> idx(d, 0);
  for (int p = 0; p < count; ++p) {
    double w = jac;
    for (int k = 0; k < d; ++k) {
      out.points.at(p, k) = region.center[k] + region.half[k] * per_dim[k].nodes[idx[k]];
      w *= per_dim[k].weights[idx[k]];
    }
    out.weights[p] = w;
    for (int k = d - 1; k >= 0; --k) {  // last dimension fastest
      if (++idx[k] < per_dim[k].n()) break;
      idx[k] = 0;
    }
  }
  return out;
}

Array latin_hypercube(int n, const std::vector<std::pair<double, double>>& bounds,
                      std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("latin_hypercube: n must be >= 1");
  for (const auto& [lo, hi] : bounds)
    if (!(lo < hi)) throw std::invalid_argument("latin_hypercube: invalid bounds");
  const int d = static_cast<int>(bounds.size());
  Array pts = Array::uninit(n, d);
  Rng rng(seed);
  for (int k = 0; k < d; ++k) {
    const auto [lo, hi] = bounds[k];
    const double width = (hi - lo) / n;
    const std::vector<int> strata = rng.permutation(n);
    for (int i = 0; i < n; ++i)
      pts.at(i, k) = lo + (strata[i] + rng.uniform01()) * width;
  }
  return pts;
}

}  // namespace tgnnwf
