#pragma once

#include <cstdint>
#include <vector>

#include "tgnnwf/losses.hpp"
#include "tgnnwf/problem.hpp"

namespace tgnnwf {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig cfg;
  std::vector<Array> m;
  std::vector<Array> v;
  long step = 0;
};

AdamState adam_init(const std::vector<Array>& params, AdamConfig cfg);

// Standard bias-corrected Adam update. Throws on non-finite gradients.
void adam_step(std::vector<Array>& params, const std::vector<Array>& grads, AdamState& state);

// Dual ascent on the theory weight: the gradient of the Lagrangian with
// respect to lambda_f is exactly the theory residual, so the update is
// lambda <- max(lambda + step * r_theory, lambda_min).
struct DualState {
  double lambda_f = 1.0;
  double step_size = 1.25;
  static constexpr double lambda_min = 1e-6;
};

void dual_step(DualState& state, double r_theory);

struct TrainConfig {
  int epochs = 1000;
  AdamConfig adam;
  double dual_step_size = 1.25;
  double lambda_init = 1.0;
  bool use_theory = true;  // false for plain data-driven training
  // Region/point chunk targets keep per-tape memory bounded.
  int weak_chunk_points = 1 << 16;
  int strong_chunk_points = 1 << 13;
};

struct EpochStats {
  int epoch = 0;
  double r_data = 0, r_theory = 0, r_ic = 0, r_bc = 0;
  double lambda_f = 0;
  double loss = 0;
  double seconds = 0;
};

struct TrainResult {
  MlpParams params;
  std::vector<EpochStats> history;
  double lambda_f_final = 0;
  bool aborted = false;
  std::string abort_reason;
  double total_seconds = 0;
};

TrainResult train(const Problem& problem, const MlpParams& initial, const TrainConfig& config);

}  // namespace tgnnwf
