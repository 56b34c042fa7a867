#include "tgnnwf/buckley.hpp"

#include <cmath>
#include <stdexcept>

#include "tgnnwf/quadrature.hpp"
#include "tgnnwf/rng.hpp"
#include "tgnnwf/testfuncs.hpp"

namespace tgnnwf {

double fw(const FracFlow& frac, double s) {
  if (s < 0.0 || s > 1.0) throw std::domain_error("fw: saturation outside [0,1]");
  const double ms2 = frac.m * s * s;
  const double d = ms2 + (1.0 - s) * (1.0 - s);
  return ms2 / d;
}

double fw_prime(const FracFlow& frac, double s) {
  if (s < 0.0 || s > 1.0) throw std::domain_error("fw_prime: saturation outside [0,1]");
  const double d = frac.m * s * s + (1.0 - s) * (1.0 - s);
  return 2.0 * frac.m * s * (1.0 - s) / (d * d);
}

BLSolution welge_shock(const FracFlow& frac) {
  const double lo0 = frac.s_wr + 1e-9;
  const double hi0 = 1.0 - frac.s_or;
  const double f_wr = fw(frac, frac.s_wr);
  auto g = [&](double s) {
    return fw_prime(frac, s) * (s - frac.s_wr) - (fw(frac, s) - f_wr);
  };
  double lo = lo0, hi = hi0;
  if (!(g(lo) > 0 && g(hi) < 0))
    throw std::runtime_error("welge_shock: tangency bracket has no sign change");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0 ? lo : hi) = mid;
  }
  BLSolution sol;
  sol.frac = frac;
  sol.s_star = 0.5 * (lo + hi);
  sol.shock_speed = fw_prime(frac, sol.s_star);
  return sol;
}

double analytic_S(const BLSolution& sol, double tau, double t) {
  if (!(t > 0)) throw std::domain_error("analytic_S: t must be positive");
  if (tau < 0) throw std::domain_error("analytic_S: tau must be >= 0");
  const double xi = tau / t;
  if (xi > sol.shock_speed) return sol.frac.s_wr;
  const double hi_sat = 1.0 - sol.frac.s_or;
  if (tau == 0.0) return hi_sat;
  // Invert f' on [s_star, 1 - S_or] where it decreases monotonically.
  double lo = sol.s_star, hi = hi_sat;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (fw_prime(sol.frac, mid) > xi ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

SnapshotStack bl_snapshots(const BLSolution& sol) {
  constexpr int n_tau = 501, n_steps = 50;
  constexpr double d_tau = 0.002, dt = 0.02;
  SnapshotStack stack;
  stack.node_coords = Array::uninit(n_tau, 1);
  for (int i = 0; i < n_tau; ++i) stack.node_coords.at(i, 0) = i * d_tau;
  for (int s = 1; s <= n_steps; ++s) {
    const double t = s * dt;
    stack.times.push_back(t);
    Array v = Array::uninit(n_tau, 1);
    for (int i = 0; i < n_tau; ++i) v.mut()[i] = analytic_S(sol, i * d_tau, t);
    stack.values.push_back(std::move(v));
  }
  return stack;
}

WeakBatch build_weak_bl(const Array& centers, double half, int quad_points, double eta) {
  WeakBatch weak;
  weak.regions = centers.rows();
  const QuadRule1D rule = gauss_legendre(quad_points);
  const std::vector<QuadRule1D> rules{rule, rule};
  weak.q = quad_points * quad_points;
  weak.points = Array::uninit(weak.regions * weak.q, 2);
  weak.coef_a = Array::uninit(weak.regions, weak.q);
  weak.coef_b = Array::uninit(weak.regions, weak.q);
  for (int r = 0; r < weak.regions; ++r) {
    const Subdomain region{{centers.at(r, 0), centers.at(r, 1)}, {half, half}};
    const TensorRule tr = tensor_rule(rules, region);
    for (int qi = 0; qi < weak.q; ++qi) {
      const double p[2] = {tr.points.at(qi, 0), tr.points.at(qi, 1)};
      weak.points.at(r * weak.q + qi, 0) = p[0];
      weak.points.at(r * weak.q + qi, 1) = p[1];
      const TestFnEval om = eta > 0 ? omega_bl_diffusion(p, region) : omega_bl(p, region);
      // r_i = -sum_q w_q [ S w_t + fw(S) w_tau (+ eta S w_tautau) ]
      weak.coef_a.at(r, qi) = -tr.weights[qi] * (om.d_dt + eta * om.d2_dx2);
      weak.coef_b.at(r, qi) = -tr.weights[qi] * om.d_dx;
    }
  }
  return weak;
}

Problem bl_problem(const BlProblemConfig& cfg) {
  if (cfg.eta < 0) throw std::invalid_argument("bl_problem: eta must be >= 0");
  const BLSolution sol = welge_shock(FracFlow{});
  const SnapshotStack stack = bl_snapshots(sol);

  Problem prob;
  prob.kind = ProblemKind::Buckley;
  prob.surrogate.input_scale = {1.0, 1.0};
  prob.surrogate.out_scale = 0.5;
  prob.surrogate.out_shift = 0.5;
  prob.eta = cfg.eta;
  prob.visc_ratio = sol.frac.m;

  prob.data = build_training_set(stack, cfg.data_per_step, cfg.train_steps, cfg.seed_data);
  if (cfg.noise > 0) {
    Rng mix(cfg.seed_data);
    mix.next_u64();
    prob.data = add_noise(prob.data, cfg.noise, mix.next_u64());
  }

  Rng seeds(cfg.seed_sampler);
  const std::uint64_t seed_ic = seeds.next_u64();
  const std::uint64_t seed_bc = seeds.next_u64();
  const std::uint64_t seed_regions = seeds.next_u64();

  // S(tau, 0) = S_wr on the initial line, S(0, t) = 1 - S_or at the inlet.
  {
    TrainSet ic;
    Array taus = latin_hypercube(cfg.ic_points, {{0.0, 1.0}}, seed_ic);
    ic.coords = Array::uninit(cfg.ic_points, 2);
    for (int i = 0; i < cfg.ic_points; ++i) {
      ic.coords.at(i, 0) = taus.at(i, 0);
      ic.coords.at(i, 1) = 0.0;
    }
    ic.labels = Array::full(cfg.ic_points, 1, sol.frac.s_wr);
    ic.noise_scale = Array::zeros(cfg.ic_points, 1);
    prob.ic = ic;

    TrainSet bc;
    Array ts = latin_hypercube(cfg.bc_points, {{0.0, 1.0}}, seed_bc);
    bc.coords = Array::uninit(cfg.bc_points, 2);
    for (int i = 0; i < cfg.bc_points; ++i) {
      bc.coords.at(i, 0) = 0.0;
      bc.coords.at(i, 1) = ts.at(i, 0);
    }
    bc.labels = Array::full(cfg.bc_points, 1, 1.0 - sol.frac.s_or);
    bc.noise_scale = Array::zeros(cfg.bc_points, 1);
    prob.bc = bc;
  }

  if (cfg.model == Model::TgnnWf && cfg.regions > 0) {
    prob.theory = TheoryKind::WeakBL;
    const double h = cfg.region_half;
    const Array centers =
        latin_hypercube(cfg.regions, {{h, 1.0 - h}, {h, 1.0 - h}}, seed_regions);
    prob.weak = build_weak_bl(centers, h, cfg.quad_points, cfg.eta);
  } else if (cfg.model == Model::Tgnn && cfg.regions > 0) {
    prob.theory = TheoryKind::StrongBL;
    prob.strong_bl_points = latin_hypercube(cfg.regions, {{0.0, 1.0}, {0.0, 1.0}}, seed_regions);
  }

  // Prediction window: remaining timesteps on the full grid.
  const int eval_steps = stack.n_steps() - cfg.train_steps;
  const int n_nodes = stack.n_nodes();
  prob.eval_coords = Array::uninit(eval_steps * n_nodes, 2);
  prob.eval_truth = Array::uninit(eval_steps * n_nodes, 1);
  int row = 0;
  for (int s = cfg.train_steps; s < stack.n_steps(); ++s) {
    for (int i = 0; i < n_nodes; ++i, ++row) {
      prob.eval_coords.at(row, 0) = stack.node_coords.at(i, 0);
      prob.eval_coords.at(row, 1) = stack.times[s];
      prob.eval_truth.mut()[row] = stack.values[s].data()[i];
    }
  }
  return prob;
}

}  // namespace tgnnwf
