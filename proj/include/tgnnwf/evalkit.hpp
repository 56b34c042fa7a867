#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tgnnwf/array.hpp"

namespace tgnnwf {

// Labeled samples in physical coordinates (time is the last column).
// noise_scale carries the per-sample observation range used by add_noise.
struct TrainSet {
  Array coords;       // n x d
  Array labels;       // n x 1
  Array noise_scale;  // n x 1
  int size() const { return labels.rows(); }
  bool empty() const { return size() == 0; }
};

TrainSet empty_train_set(int dim);

// Reference solution stored as per-timestep nodal values on a fixed set of
// spatial nodes.
struct SnapshotStack {
  Array node_coords;          // n_nodes x d_space
  std::vector<double> times;  // one per step
  std::vector<Array> values;  // one (n_nodes x 1) array per step
  int n_nodes() const { return node_coords.rows(); }
  int n_steps() const { return static_cast<int>(times.size()); }
};

// Uniform sampling without replacement of points_per_step nodes from each of
// the first `steps` timesteps. noise_scale is the max-minus-min of the nodal
// value over that training window.
TrainSet build_training_set(const SnapshotStack& stack, int points_per_step, int steps,
                            std::uint64_t seed);

// label += range * a * eps with eps ~ U[-1, 1] i.i.d. per sample.
TrainSet add_noise(const TrainSet& set, double a, std::uint64_t seed);

double rel_l2(const Array& pred, const Array& truth);
double r2(const Array& pred, const Array& truth);

struct MetricsReport {
  double rel_l2 = 0;
  double r2 = 0;
  double train_seconds = 0;
  double lambda_f_final = 0;
  std::string fingerprint;
};

}  // namespace tgnnwf
