#include "tgnnwf/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tgnnwf/rng.hpp"

namespace tgnnwf {

TrainSet empty_train_set(int dim) {
  TrainSet s;
  s.coords = Array::zeros(0, dim);
  s.labels = Array::zeros(0, 1);
  s.noise_scale = Array::zeros(0, 1);
  return s;
}

TrainSet build_training_set(const SnapshotStack& stack, int points_per_step, int steps,
                            std::uint64_t seed) {
  if (steps < 0 || steps > stack.n_steps())
    throw std::invalid_argument("build_training_set: step window exceeds snapshots");
  if (points_per_step > stack.n_nodes())
    throw std::invalid_argument("build_training_set: more points per step than nodes");
  const int d_space = stack.node_coords.cols();
  if (points_per_step <= 0 || steps == 0) return empty_train_set(d_space + 1);

  // Per-node range of the value over the training window.
  std::vector<double> range(stack.n_nodes());
  for (int i = 0; i < stack.n_nodes(); ++i) {
    double lo = stack.values[0].data()[i], hi = lo;
    for (int s = 1; s < steps; ++s) {
      const double v = stack.values[s].data()[i];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    range[i] = hi - lo;
  }

  const int n = points_per_step * steps;
  TrainSet set;
  set.coords = Array::uninit(n, d_space + 1);
  set.labels = Array::uninit(n, 1);
  set.noise_scale = Array::uninit(n, 1);
  Rng rng(seed);
  int row = 0;
  for (int s = 0; s < steps; ++s) {
    const std::vector<int> pick = rng.sample_without_replacement(stack.n_nodes(), points_per_step);
    for (int node : pick) {
      for (int k = 0; k < d_space; ++k) set.coords.at(row, k) = stack.node_coords.at(node, k);
      set.coords.at(row, d_space) = stack.times[s];
      set.labels.mut()[row] = stack.values[s].data()[node];
      set.noise_scale.mut()[row] = range[node];
      ++row;
    }
  }
  return set;
}

TrainSet add_noise(const TrainSet& set, double a, std::uint64_t seed) {
  if (a < 0) throw std::invalid_argument("add_noise: noise fraction must be >= 0");
  TrainSet out = set;
  Array labels = Array::uninit(set.labels.rows(), 1);
  Rng rng(seed);
  for (int i = 0; i < set.size(); ++i)
    labels.mut()[i] = set.labels.data()[i] + set.noise_scale.data()[i] * a * rng.uniform_sym();
  out.labels = labels;
  return out;
}

double rel_l2(const Array& pred, const Array& truth) {
  check_same_shape(pred, truth, "rel_l2");
  double num = 0, den = 0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double d = pred.data()[k] - truth.data()[k];
    num += d * d;
    den += truth.data()[k] * truth.data()[k];
  }
  if (den <= 0) throw std::invalid_argument("rel_l2: truth has zero norm");
  return std::sqrt(num / den);
}

double r2(const Array& pred, const Array& truth) {
  check_same_shape(pred, truth, "r2");
  const std::size_t n = truth.size();
  if (n == 0) throw std::invalid_argument("r2: empty input");
  double mean = 0;
  for (std::size_t k = 0; k < n; ++k) mean += truth.data()[k];
  mean /= static_cast<double>(n);
  double ss_res = 0, ss_tot = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = pred.data()[k] - truth.data()[k];
    const double t = truth.data()[k] - mean;
    ss_res += r * r;
    ss_tot += t * t;
  }
  if (ss_tot <= 0) throw std::invalid_argument("r2: truth is constant");
  return 1.0 - ss_res / ss_tot;
}

}  // namespace tgnnwf
