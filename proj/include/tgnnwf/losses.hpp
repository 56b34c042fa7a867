#pragma once

#include "tgnnwf/problem.hpp"
#include "tgnnwf/tape.hpp"

namespace tgnnwf {

// Network attached to a tape together with its physical-unit mapping.
struct NetOnTape {
  const MlpParams* mlp;
  const MlpRefs* refs;
  const SurrogateSpec* spec;
};

// Physical-coordinate batch -> physical-unit prediction (n x 1).
DiffValue surrogate_forward(Tape& tape, const NetOnTape& net, const Array& phys_points);

// Tape-free counterpart for evaluation.
Array surrogate_eval(const MlpParams& mlp, const SurrogateSpec& spec, const Array& phys_points);

// Mean squared mismatch against labeled samples; 0 for an empty set. The
// data, initial-condition and boundary-condition residuals all take this
// form and differ only in which sample set they see.
DiffValue data_residual(Tape& tape, const NetOnTape& net, const TrainSet& samples);
inline DiffValue ic_residual(Tape& t, const NetOnTape& n, const TrainSet& s) { return data_residual(t, n, s); }
inline DiffValue bc_residual(Tape& t, const NetOnTape& n, const TrainSet& s) { return data_residual(t, n, s); }

// Fractional flow fw(S) = m S^2 / (m S^2 + (1-S)^2) and its derivative,
// recorded elementwise on the tape (no domain clamp: network outputs may
// leave [0,1] during training and the expression stays well defined).
DiffValue fw_on_tape(Tape& tape, const DiffValue& s, double m);
DiffValue fw_prime_on_tape(Tape& tape, const DiffValue& s, double m);

// Strong-form residuals: mean over collocation points of the squared PDE
// residual, with input derivatives obtained by nested reverse-mode sweeps
// and chain-ruled through the surrogate normalization.
DiffValue strong_residual_sp(Tape& tape, const NetOnTape& net, const StrongBatchSP& batch,
                             double s_storage);
DiffValue strong_residual_bl(Tape& tape, const NetOnTape& net, const Array& points, double eta,
                             double m);

// Weak-form residuals: mean over regions of the squared region integral.
// Only network evaluations appear; all derivatives live on the test
// function inside the precomputed coefficients.
DiffValue weak_residual_sp(Tape& tape, const NetOnTape& net, const WeakBatch& weak);
DiffValue weak_residual_bl(Tape& tape, const NetOnTape& net, const WeakBatch& weak, double m);

// Sum (not mean) of squared region residuals over [r0, r1); the training
// loop evaluates the theory term in region chunks through this.
DiffValue weak_residual_sq_sum(Tape& tape, const NetOnTape& net, const WeakBatch& weak,
                               bool with_fw, double m, int r0, int r1);
// Same for strong-form point chunks.
DiffValue strong_residual_sq_sum_sp(Tape& tape, const NetOnTape& net, const StrongBatchSP& batch,
                                    double s_storage, int p0, int p1);
DiffValue strong_residual_sq_sum_bl(Tape& tape, const NetOnTape& net, const Array& points,
                                    double eta, double m, int p0, int p1);

struct ResidualBundle {
  DiffValue r_data;
  DiffValue r_theory;
  DiffValue r_ic;
  DiffValue r_bc;
};

// r_data + r_ic + r_bc + lambda_f * r_theory (unit weights on the first
// three).
DiffValue total_loss(Tape& tape, const ResidualBundle& bundle, double lambda_f);

}  // namespace tgnnwf
