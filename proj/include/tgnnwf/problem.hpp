#pragma once

#include <string>
#include <vector>

#include "tgnnwf/evalkit.hpp"
#include "tgnnwf/mlp.hpp"

namespace tgnnwf {

enum class Model { Dnn, Tgnn, TgnnWf };
enum class ProblemKind { SinglePhase, Buckley };

std::string model_name(Model m);
Model model_from_name(const std::string& s);
std::string problem_name(ProblemKind p);
ProblemKind problem_from_name(const std::string& s);

// Maps network inputs/outputs between physical units and the normalized
// space the network is trained in: x_net = x_phys / input_scale[d],
// u_phys = out_scale * u_net + out_shift. PDE derivatives are chain-ruled
// through these constants.
struct SurrogateSpec {
  std::vector<double> input_scale;
  double out_scale = 1.0;
  double out_shift = 0.0;
  int dim() const { return static_cast<int>(input_scale.size()); }
};

// Precomputed weak-form contraction: region residual i is
//   r_i = sum_q coef_a[i,q] * u(p_iq) (+ coef_b[i,q] * fw(u(p_iq))),
// with the quadrature weights, test-function derivatives, conductivity
// factors and the overall sign folded into the coefficients at build time.
struct WeakBatch {
  Array points;  // (regions * q) x d physical, region-major
  Array coef_a;  // regions x q
  Array coef_b;  // regions x q; empty when the flux term is absent
  int regions = 0;
  int q = 0;
  bool empty() const { return regions == 0; }
};

// Strong-form collocation batch for the single-phase equation; conductivity
// and its gradient are evaluated once at build time.
struct StrongBatchSP {
  Array points;  // n x 3 (x, y, t)
  Array k;       // n x 1
  Array kx;      // n x 1
  Array ky;      // n x 1
  bool empty() const { return points.rows() == 0; }
};

enum class TheoryKind { None, StrongSP, WeakSP, StrongBL, WeakBL };

// Everything the trainer needs for one experiment.
struct Problem {
  ProblemKind kind = ProblemKind::SinglePhase;
  SurrogateSpec surrogate;
  TrainSet data, ic, bc;
  TheoryKind theory = TheoryKind::None;
  WeakBatch weak;
  StrongBatchSP strong_sp;
  Array strong_bl_points;  // n x 2 (tau, t)
  double s_storage = 0.0;
  double eta = 0.0;
  double visc_ratio = 2.0;
  Array eval_coords;  // prediction window
  Array eval_truth;
};

}  // namespace tgnnwf
