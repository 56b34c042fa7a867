#include "tgnnwf/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace tgnnwf {

AdamState adam_init(const std::vector<Array>& params, AdamConfig cfg) {
  AdamState st;
  st.cfg = cfg;
  for (const Array& p : params) {
    st.m.push_back(Array::zeros(p.rows(), p.cols()));
    st.v.push_back(Array::zeros(p.rows(), p.cols()));
  }
  return st;
}

void adam_step(std::vector<Array>& params, const std::vector<Array>& grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw std::invalid_argument("adam_step: array count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    check_same_shape(params[i], grads[i], "adam_step");
    if (!all_finite(grads[i]))
      throw std::runtime_error("adam_step: non-finite gradient in parameter array " +
                               std::to_string(i) + " at step " + std::to_string(state.step + 1));
  }
  state.step += 1;
  const AdamConfig& c = state.cfg;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Array m = Array::uninit(params[i].rows(), params[i].cols());
    Array v = Array::uninit(params[i].rows(), params[i].cols());
    Array p = Array::uninit(params[i].rows(), params[i].cols());
    const double* gp = grads[i].data();
    const double* mp = state.m[i].data();
    const double* vp = state.v[i].data();
    const double* pp = params[i].data();
    for (std::size_t k = 0; k < params[i].size(); ++k) {
      const double g = gp[k];
      const double mk = c.beta1 * mp[k] + (1.0 - c.beta1) * g;
      const double vk = c.beta2 * vp[k] + (1.0 - c.beta2) * g * g;
      m.mut()[k] = mk;
      v.mut()[k] = vk;
      p.mut()[k] = pp[k] - c.lr * (mk / bc1) / (std::sqrt(vk / bc2) + c.eps);
    }
    state.m[i] = m;
    state.v[i] = v;
    params[i] = p;
  }
}

void dual_step(DualState& state, double r_theory) {
  if (r_theory < 0) throw std::invalid_argument("dual_step: theory residual must be >= 0");
  state.lambda_f = std::max(state.lambda_f + state.step_size * r_theory, DualState::lambda_min);
}

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

// Evaluates one loss component on its own tape and folds weight * gradient
// into the accumulator. Keeping each component (and each theory chunk) on a
// short-lived tape bounds peak memory.
double eval_component(const Problem& prob, const MlpParams& mlp,
                      const std::function<DiffValue(Tape&, const NetOnTape&)>& build,
                      double weight, std::vector<Array>& grad_acc) {
  Tape tape;
  const MlpRefs refs = attach_mlp(tape, mlp);
  const NetOnTape net{&mlp, &refs, &prob.surrogate};
  DiffValue value = build(tape, net);
  if (value.node < 0) return value.value.item();  // constant: no gradient flows
  const std::vector<Array> grads = tape.grad(value, refs.params);
  for (std::size_t i = 0; i < grads.size(); ++i) axpy_inplace(grad_acc[i], weight, grads[i]);
  return value.value.item();
}

int theory_unit_count(const Problem& prob) {
  switch (prob.theory) {
    case TheoryKind::WeakSP:
    case TheoryKind::WeakBL: return prob.weak.regions;
    case TheoryKind::StrongSP: return prob.strong_sp.points.rows();
    case TheoryKind::StrongBL: return prob.strong_bl_points.rows();
    case TheoryKind::None: return 0;
  }
  return 0;
}

}  // namespace

TrainResult train(const Problem& prob, const MlpParams& initial, const TrainConfig& cfg) {
  TrainResult result;
  result.params = initial;
  result.lambda_f_final = cfg.lambda_init;
  if (cfg.epochs <= 0) return result;

  std::vector<Array> params = mlp_flat_params(result.params);
  AdamState adam = adam_init(params, cfg.adam);
  DualState dual{cfg.lambda_init, cfg.dual_step_size};

  const bool theory = cfg.use_theory && prob.theory != TheoryKind::None;
  const int n_units = theory ? theory_unit_count(prob) : 0;
  int chunk_units = n_units;
  if (prob.theory == TheoryKind::WeakSP || prob.theory == TheoryKind::WeakBL) {
    if (prob.weak.q > 0) chunk_units = std::max(1, cfg.weak_chunk_points / prob.weak.q);
  } else if (theory) {
    chunk_units = std::max(1, cfg.strong_chunk_points);
  }

  const auto t_start = clock_type::now();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t_epoch = clock_type::now();
    std::vector<Array> grad_acc;
    for (const Array& p : params) grad_acc.push_back(Array::zeros(p.rows(), p.cols()));
    MlpParams mlp = result.params;
    mlp_set_flat_params(mlp, params);

    EpochStats st;
    st.epoch = epoch;
    st.lambda_f = dual.lambda_f;

    try {
      st.r_data = eval_component(prob, mlp, [&](Tape& t, const NetOnTape& n) {
        return data_residual(t, n, prob.data);
      }, 1.0, grad_acc);
      st.r_ic = eval_component(prob, mlp, [&](Tape& t, const NetOnTape& n) {
        return ic_residual(t, n, prob.ic);
      }, 1.0, grad_acc);
      st.r_bc = eval_component(prob, mlp, [&](Tape& t, const NetOnTape& n) {
        return bc_residual(t, n, prob.bc);
      }, 1.0, grad_acc);

      if (theory && n_units > 0) {
        double sq_sum = 0.0;
        for (int u0 = 0; u0 < n_units; u0 += chunk_units) {
          const int u1 = std::min(n_units, u0 + chunk_units);
          // d(mean)/d(params) = sum over chunks of d(chunk sum)/d(params) / N
          const double w = dual.lambda_f / n_units;
          sq_sum += eval_component(prob, mlp, [&](Tape& t, const NetOnTape& n) {
            switch (prob.theory) {
              case TheoryKind::WeakSP:
                return weak_residual_sq_sum(t, n, prob.weak, false, 0.0, u0, u1);
              case TheoryKind::WeakBL:
                return weak_residual_sq_sum(t, n, prob.weak, true, prob.visc_ratio, u0, u1);
              case TheoryKind::StrongSP:
                return strong_residual_sq_sum_sp(t, n, prob.strong_sp, prob.s_storage, u0, u1);
              case TheoryKind::StrongBL:
                return strong_residual_sq_sum_bl(t, n, prob.strong_bl_points, prob.eta,
                                                 prob.visc_ratio, u0, u1);
              default: return DiffValue::constant(0.0);
            }
          }, w, grad_acc);
        }
        st.r_theory = sq_sum / n_units;
      }

      st.loss = st.r_data + st.r_ic + st.r_bc + dual.lambda_f * st.r_theory;
      if (!std::isfinite(st.loss)) {
        result.aborted = true;
        result.abort_reason = "non-finite loss at epoch " + std::to_string(epoch);
      } else {
        adam_step(params, grad_acc, adam);
        if (theory) dual_step(dual, st.r_theory);
      }
    } catch (const std::runtime_error& err) {
      result.aborted = true;
      result.abort_reason = err.what();
    }

    if (result.aborted) break;
    st.seconds = seconds_since(t_epoch);
    result.history.push_back(st);
  }

  mlp_set_flat_params(result.params, params);
  result.lambda_f_final = dual.lambda_f;
  result.total_seconds = seconds_since(t_start);
  return result;
}

}  // namespace tgnnwf
