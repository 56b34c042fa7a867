#pragma once

#include <cstdint>

#include "tgnnwf/problem.hpp"

namespace tgnnwf {

// Corey-type fractional flow with viscosity ratio m and residual
// saturations. The experiments fix S_wr = S_or = 0.
struct FracFlow {
  double m = 2.0;
  double s_wr = 0.0;
  double s_or = 0.0;
};

double fw(const FracFlow& frac, double s);
double fw_prime(const FracFlow& frac, double s);

// Shock saturation from the Welge tangency condition
// f'(S*) = (f(S*) - f(S_wr)) / (S* - S_wr), and the resulting front speed.
struct BLSolution {
  FracFlow frac;
  double s_star = 0;
  double shock_speed = 0;
};

BLSolution welge_shock(const FracFlow& frac);

// Self-similar solution S(tau, t): rarefaction fan behind the front, S_wr
// ahead of it. Requires t > 0.
double analytic_S(const BLSolution& sol, double tau, double t);

// Analytic snapshots on the reference grid (501 tau-points spacing 0.002,
// 50 timesteps spacing 0.02).
SnapshotStack bl_snapshots(const BLSolution& sol);

struct BlProblemConfig {
  int data_per_step = 100;
  int train_steps = 20;
  double eta = 0.0;
  int regions = 10000;       // weak-form regions or strong-form points
  double region_half = 0.004;
  int quad_points = 10;
  int ic_points = 1000;
  int bc_points = 1000;
  double noise = 0.0;
  Model model = Model::TgnnWf;
  std::uint64_t seed_data = 2;
  std::uint64_t seed_sampler = 3;
};

Problem bl_problem(const BlProblemConfig& cfg);

// Weak-form coefficients for regions centered at `centers` (n x 2) with the
// given half-length: the omega_bl family for eta = 0, omega_bl_diffusion
// otherwise.
WeakBatch build_weak_bl(const Array& centers, double half, int quad_points, double eta);

}  // namespace tgnnwf
