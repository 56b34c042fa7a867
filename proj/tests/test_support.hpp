#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "tgnnwf/array.hpp"
#include "tgnnwf/rng.hpp"

namespace tgnnwf::test {

inline double rel_err(double a, double b, double floor = 1e-12) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), floor});
}

inline Array random_array(Rng& rng, int rows, int cols, double lo = -1.0, double hi = 1.0) {
  Array a = Array::uninit(rows, cols);
  for (std::size_t k = 0; k < a.size(); ++k) a.mut()[k] = rng.uniform(lo, hi);
  return a;
}

// Central finite differences of a scalar function with respect to every
// entry of every parameter array.
inline std::vector<Array> fd_grad(const std::function<double(const std::vector<Array>&)>& f,
                                  const std::vector<Array>& params, double step) {
  std::vector<Array> grads;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Array g = Array::zeros(params[i].rows(), params[i].cols());
    for (std::size_t k = 0; k < params[i].size(); ++k) {
      std::vector<Array> p = params;
      Array hi = Array::uninit(params[i].rows(), params[i].cols());
      Array lo = Array::uninit(params[i].rows(), params[i].cols());
      std::copy(params[i].data(), params[i].data() + params[i].size(), hi.mut());
      std::copy(params[i].data(), params[i].data() + params[i].size(), lo.mut());
      hi.mut()[k] += step;
      lo.mut()[k] -= step;
      p[i] = hi;
      const double fp = f(p);
      p[i] = lo;
      const double fm = f(p);
      g.mut()[k] = (fp - fm) / (2.0 * step);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

inline double max_rel_err(const Array& a, const Array& b, double floor = 1e-9) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    worst = std::max(worst, rel_err(a.data()[k], b.data()[k], floor));
  return worst;
}

}  // namespace tgnnwf::test
