#include "tgnnwf/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace tgnnwf {

namespace {

Array normalize_points(const SurrogateSpec& spec, const Array& phys) {
  if (phys.cols() != spec.dim())
    throw std::invalid_argument("surrogate: point width != input dimension");
  Array out = Array::uninit(phys.rows(), phys.cols());
  for (int i = 0; i < phys.rows(); ++i)
    for (int j = 0; j < phys.cols(); ++j) out.at(i, j) = phys.at(i, j) / spec.input_scale[j];
  return out;
}

Array slice_rows(const Array& a, int r0, int r1) {
  Array out = Array::uninit(r1 - r0, a.cols());
  std::copy(a.data() + static_cast<std::size_t>(r0) * a.cols(),
            a.data() + static_cast<std::size_t>(r1) * a.cols(), out.mut());
  return out;
}

DiffValue to_physical(Tape& tape, const SurrogateSpec& spec, const DiffValue& raw) {
  DiffValue u = raw;
  if (spec.out_scale != 1.0) u = tape.scale(u, spec.out_scale);
  if (spec.out_shift != 0.0) u = tape.add_const(u, spec.out_shift);
  return u;
}

}  // namespace

DiffValue surrogate_forward(Tape& tape, const NetOnTape& net, const Array& phys_points) {
  const DiffValue xn(normalize_points(*net.spec, phys_points));
  return to_physical(tape, *net.spec, mlp_forward(tape, *net.mlp, *net.refs, xn));
}

Array surrogate_eval(const MlpParams& mlp, const SurrogateSpec& spec, const Array& phys_points) {
  Array u = mlp_eval(mlp, normalize_points(spec, phys_points));
  if (spec.out_scale != 1.0) u = ew_scale(u, spec.out_scale);
  if (spec.out_shift != 0.0) u = ew_add(u, Array::scalar(spec.out_shift));
  return u;
}

DiffValue data_residual(Tape& tape, const NetOnTape& net, const TrainSet& samples) {
  if (samples.empty()) return DiffValue::constant(0.0);
  DiffValue pred = surrogate_forward(tape, net, samples.coords);
  return tape.mean(tape.square(tape.sub(pred, DiffValue(samples.labels))));
}

DiffValue fw_on_tape(Tape& tape, const DiffValue& s, double m) {
  DiffValue ms2 = tape.scale(tape.square(s), m);
  DiffValue den = tape.add(ms2, tape.square(tape.sub(DiffValue::constant(1.0), s)));
  return tape.div(ms2, den);
}

DiffValue fw_prime_on_tape(Tape& tape, const DiffValue& s, double m) {
  DiffValue one_minus = tape.sub(DiffValue::constant(1.0), s);
  DiffValue den = tape.add(tape.scale(tape.square(s), m), tape.square(one_minus));
  DiffValue num = tape.scale(tape.mul(s, one_minus), 2.0 * m);
  return tape.div(num, tape.square(den));
}

namespace {

// Batched derivative columns of the raw network output with respect to the
// normalized inputs: one recorded sweep of sum(u) gives all first-order
// columns at once, a second sweep of a selected column gives the second
// order one.
struct DerivCtx {
  Tape* tape;
  DiffValue xn;       // leaf, n x d
  DiffValue u_raw;    // n x 1
  DiffValue g1;       // n x d (recorded)
};

DerivCtx forward_with_first_order(Tape& tape, const NetOnTape& net, const Array& phys) {
  DerivCtx ctx{&tape};
  ctx.xn = tape.leaf(normalize_points(*net.spec, phys));
  ctx.u_raw = mlp_forward(tape, *net.mlp, *net.refs, ctx.xn);
  const DiffValue wrt[] = {ctx.xn};
  ctx.g1 = tape.grad_recorded(tape.sum(ctx.u_raw), wrt)[0];
  return ctx;
}

// d(u_raw)/dxn_dim per point, scaled to physical units of the given order.
DiffValue phys_derivative(DerivCtx& ctx, const SurrogateSpec& spec, const DiffValue& g, int dim,
                          int order) {
  const double factor = spec.out_scale / std::pow(spec.input_scale[dim], order);
  return ctx.tape->scale(ctx.tape->select_col(g, dim), factor);
}

DiffValue second_order_cols(DerivCtx& ctx, int dim) {
  const DiffValue wrt[] = {ctx.xn};
  return ctx.tape->grad_recorded(ctx.tape->sum(ctx.tape->select_col(ctx.g1, dim)), wrt)[0];
}

DiffValue strong_sq_sp(Tape& tape, const NetOnTape& net, const StrongBatchSP& batch,
                       double s_storage, int p0, int p1) {
  const Array pts = slice_rows(batch.points, p0, p1);
  DerivCtx ctx = forward_with_first_order(tape, net, pts);
  const SurrogateSpec& spec = *net.spec;

  DiffValue h_x = phys_derivative(ctx, spec, ctx.g1, 0, 1);
  DiffValue h_y = phys_derivative(ctx, spec, ctx.g1, 1, 1);
  DiffValue h_t = phys_derivative(ctx, spec, ctx.g1, 2, 1);
  DiffValue h_xx = phys_derivative(ctx, spec, second_order_cols(ctx, 0), 0, 2);
  DiffValue h_yy = phys_derivative(ctx, spec, second_order_cols(ctx, 1), 1, 2);

  const DiffValue k(slice_rows(batch.k, p0, p1));
  const DiffValue kx(slice_rows(batch.kx, p0, p1));
  const DiffValue ky(slice_rows(batch.ky, p0, p1));

  // S_s h_t - (K_x h_x + K h_xx) - (K_y h_y + K h_yy)
  DiffValue flux_x = tape.add(tape.mul(kx, h_x), tape.mul(k, h_xx));
  DiffValue flux_y = tape.add(tape.mul(ky, h_y), tape.mul(k, h_yy));
  DiffValue res = tape.sub(tape.scale(h_t, s_storage), tape.add(flux_x, flux_y));
  return tape.sum(tape.square(res));
}

DiffValue strong_sq_bl(Tape& tape, const NetOnTape& net, const Array& points, double eta, double m,
                       int p0, int p1) {
  const Array pts = slice_rows(points, p0, p1);
  DerivCtx ctx = forward_with_first_order(tape, net, pts);
  const SurrogateSpec& spec = *net.spec;

  DiffValue s_tau = phys_derivative(ctx, spec, ctx.g1, 0, 1);
  DiffValue s_t = phys_derivative(ctx, spec, ctx.g1, 1, 1);
  DiffValue s_phys = to_physical(tape, spec, ctx.u_raw);

  DiffValue res = tape.add(s_t, tape.mul(fw_prime_on_tape(tape, s_phys, m), s_tau));
  if (eta > 0) {
    DiffValue s_tautau = phys_derivative(ctx, spec, second_order_cols(ctx, 0), 0, 2);
    res = tape.sub(res, tape.scale(s_tautau, eta));
  }
  return tape.sum(tape.square(res));
}

}  // namespace

DiffValue weak_residual_sq_sum(Tape& tape, const NetOnTape& net, const WeakBatch& weak,
                               bool with_fw, double m, int r0, int r1) {
  if (r0 < 0 || r1 > weak.regions || r0 >= r1)
    throw std::invalid_argument("weak_residual_sq_sum: bad region range");
  const int q = weak.q;
  const Array pts = slice_rows(weak.points, r0 * q, r1 * q);
  DiffValue u = surrogate_forward(tape, net, pts);           // (r*q) x 1
  DiffValue um = tape.reshape(u, r1 - r0, q);                // region-major rows
  DiffValue terms = tape.mul(um, DiffValue(slice_rows(weak.coef_a, r0, r1)));
  if (with_fw) {
    DiffValue f = fw_on_tape(tape, um, m);
    terms = tape.add(terms, tape.mul(f, DiffValue(slice_rows(weak.coef_b, r0, r1))));
  }
  DiffValue r = tape.rowsum(terms);
  return tape.sum(tape.square(r));
}

DiffValue strong_residual_sq_sum_sp(Tape& tape, const NetOnTape& net, const StrongBatchSP& batch,
                                    double s_storage, int p0, int p1) {
  return strong_sq_sp(tape, net, batch, s_storage, p0, p1);
}

DiffValue strong_residual_sq_sum_bl(Tape& tape, const NetOnTape& net, const Array& points,
                                    double eta, double m, int p0, int p1) {
  return strong_sq_bl(tape, net, points, eta, m, p0, p1);
}

DiffValue strong_residual_sp(Tape& tape, const NetOnTape& net, const StrongBatchSP& batch,
                             double s_storage) {
  if (batch.empty()) return DiffValue::constant(0.0);
  const int n = batch.points.rows();
  return tape.scale(strong_sq_sp(tape, net, batch, s_storage, 0, n), 1.0 / n);
}

DiffValue strong_residual_bl(Tape& tape, const NetOnTape& net, const Array& points, double eta,
                             double m) {
  if (points.rows() == 0) return DiffValue::constant(0.0);
  return tape.scale(strong_sq_bl(tape, net, points, eta, m, 0, points.rows()), 1.0 / points.rows());
}

DiffValue weak_residual_sp(Tape& tape, const NetOnTape& net, const WeakBatch& weak) {
  if (weak.empty()) return DiffValue::constant(0.0);
  return tape.scale(weak_residual_sq_sum(tape, net, weak, false, 0.0, 0, weak.regions),
                    1.0 / weak.regions);
}

DiffValue weak_residual_bl(Tape& tape, const NetOnTape& net, const WeakBatch& weak, double m) {
  if (weak.empty()) return DiffValue::constant(0.0);
  return tape.scale(weak_residual_sq_sum(tape, net, weak, true, m, 0, weak.regions),
                    1.0 / weak.regions);
}

DiffValue total_loss(Tape& tape, const ResidualBundle& bundle, double lambda_f) {
  if (!(lambda_f > 0)) throw std::invalid_argument("total_loss: lambda_f must be positive");
  DiffValue sum = tape.add(tape.add(bundle.r_data, bundle.r_ic), bundle.r_bc);
  return tape.add(sum, tape.scale(bundle.r_theory, lambda_f));
}

}  // namespace tgnnwf
