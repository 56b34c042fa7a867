#include "tgnnwf/singlephase.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "tgnnwf/quadrature.hpp"
#include "tgnnwf/rng.hpp"
#include "tgnnwf/testfuncs.hpp"

namespace tgnnwf {

namespace {

constexpr double kDomain = 1020.0;
constexpr double kTimeLength = 10.0;
constexpr double kHeadLeft = 202.0;
constexpr double kHeadRight = 200.0;

double bisect(const std::function<double(double)>& f, double lo, double hi, const char* what) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0) return lo;
  if (fhi == 0) return hi;
  if ((flo > 0) == (fhi > 0))
    throw std::runtime_error(std::string(what) + ": no sign change in bracket");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double Kle1D::eval(int k, double x) const {
  const double u = x - 0.5 * length;
  const double w = freq[k];
  return (even[k] ? std::cos(w * u) : std::sin(w * u)) / norm[k];
}

double Kle1D::eval_deriv(int k, double x) const {
  const double u = x - 0.5 * length;
  const double w = freq[k];
  return (even[k] ? -w * std::sin(w * u) : w * std::cos(w * u)) / norm[k];
}

Kle1D kle_1d(double length, double eta, int n_terms) {
  if (eta <= 0 || length <= 0) throw std::invalid_argument("kle_1d: lengths must be positive");
  const double a = 0.5 * length;
  const double c = 1.0 / eta;
  const double step = std::numbers::pi / a;

  struct Root {
    double w;
    bool even;
  };
  std::vector<Root> roots;
  const double margin = 1e-9 * step;
  // Even roots of c cos(wa) = w sin(wa): one per interval ((k-1/2)pi/a, (k+1/2)pi/a).
  auto feven = [&](double w) { return c * std::cos(w * a) - w * std::sin(w * a); };
  auto fodd = [&](double w) { return w * std::cos(w * a) + c * std::sin(w * a); };
  for (int k = 0; roots.size() < static_cast<std::size_t>(2 * n_terms + 2); ++k) {
    const double lo = k == 0 ? margin : (k - 0.5) * step + margin;
    const double hi = (k + 0.5) * step - margin;
    roots.push_back({bisect(feven, lo, hi, "kle even root"), true});
    if (k >= 1) roots.push_back({bisect(fodd, lo, hi, "kle odd root"), false});
  }
  std::sort(roots.begin(), roots.end(), [](const Root& x, const Root& y) { return x.w < y.w; });
  roots.resize(n_terms);

  Kle1D basis;
  basis.length = length;
  basis.eta = eta;
  for (const Root& r : roots) {
    basis.freq.push_back(r.w);
    basis.lambda.push_back(2.0 * c / (r.w * r.w + c * c));
    const double s = std::sin(2.0 * r.w * a) / (2.0 * r.w);
    basis.norm.push_back(std::sqrt(r.even ? a + s : a - s));
    basis.even.push_back(r.even ? 1 : 0);
  }
  return basis;
}

double ConductivityField::ln_k(double x, double y) const {
  double s = 0.0;
  for (std::size_t n = 0; n < modes.size(); ++n)
    s += modes[n].sqrt_lambda * xi[n] * basis_x.eval(modes[n].ix, x) * basis_y.eval(modes[n].iy, y);
  return s;
}

void ConductivityField::eval(double x, double y, double& k, double& kx, double& ky) const {
  double lnk = 0.0, dx = 0.0, dy = 0.0;
  for (std::size_t n = 0; n < modes.size(); ++n) {
    const double coef = modes[n].sqrt_lambda * xi[n];
    const double fx = basis_x.eval(modes[n].ix, x);
    const double fy = basis_y.eval(modes[n].iy, y);
    lnk += coef * fx * fy;
    dx += coef * basis_x.eval_deriv(modes[n].ix, x) * fy;
    dy += coef * fx * basis_y.eval_deriv(modes[n].iy, y);
  }
  k = std::exp(lnk);
  kx = k * dx;
  ky = k * dy;
}

ConductivityField kle_build(double length_x, double length_y, double eta_x, double eta_y,
                            int n_terms, std::uint64_t seed) {
  ConductivityField field;
  field.basis_x = kle_1d(length_x, eta_x, n_terms);
  field.basis_y = kle_1d(length_y, eta_y, n_terms);
  struct Pair {
    int ix, iy;
    double lambda;
  };
  std::vector<Pair> pairs;
  for (int i = 0; i < n_terms; ++i)
    for (int j = 0; j < n_terms; ++j)
      pairs.push_back({i, j, field.basis_x.lambda[i] * field.basis_y.lambda[j]});
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.lambda != b.lambda) return a.lambda > b.lambda;
    if (a.ix != b.ix) return a.ix < b.ix;
    return a.iy < b.iy;
  });
  pairs.resize(n_terms);
  Rng rng(seed);
  for (const Pair& p : pairs) {
    field.modes.push_back({p.ix, p.iy, std::sqrt(p.lambda)});
    field.xi.push_back(rng.normal());
  }
  return field;
}

namespace {

// Sparse symmetric system for the implicit step on the 51x51 grid.
// Unknowns are all nodes except the Dirichlet left/right columns.
struct FdSystem {
  int nx, ny;
  double dx2;
  std::vector<double> k_node;        // nx * ny
  std::vector<double> diag_flux;     // per unknown: sum of T/dx2
  std::vector<double> rhs_dirichlet; // per unknown: T * h_D / dx2
  // neighbor transmissibilities (T/dx2) per unknown, 0 when absent
  std::vector<double> t_e, t_w, t_n, t_s;

  int n_unknowns() const { return (nx - 2) * ny; }
  int uidx(int i, int j) const { return (i - 1) * ny + j; }

  explicit FdSystem(const ConductivityField& field, int nx_, int ny_, double spacing)
      : nx(nx_), ny(ny_), dx2(spacing * spacing) {
    k_node.resize(static_cast<std::size_t>(nx) * ny);
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j) {
        double k, kx, ky;
        field.eval(i * spacing, j * spacing, k, kx, ky);
        k_node[static_cast<std::size_t>(i) * ny + j] = k;
      }
    auto harm = [&](int i0, int j0, int i1, int j1) {
      const double a = k_node[static_cast<std::size_t>(i0) * ny + j0];
      const double b = k_node[static_cast<std::size_t>(i1) * ny + j1];
      return 2.0 * a * b / (a + b);
    };
    const int n = n_unknowns();
    diag_flux.assign(n, 0.0);
    rhs_dirichlet.assign(n, 0.0);
    t_e.assign(n, 0.0);
    t_w.assign(n, 0.0);
    t_n.assign(n, 0.0);
    t_s.assign(n, 0.0);
    for (int i = 1; i < nx - 1; ++i)
      for (int j = 0; j < ny; ++j) {
        const int u = uidx(i, j);
        const double te = harm(i, j, i + 1, j) / dx2;
        const double tw = harm(i, j, i - 1, j) / dx2;
        diag_flux[u] += te + tw;
        if (i + 1 == nx - 1)
          rhs_dirichlet[u] += te * kHeadRight;
        else
          t_e[u] = te;
        if (i - 1 == 0)
          rhs_dirichlet[u] += tw * kHeadLeft;
        else
          t_w[u] = tw;
        if (j + 1 < ny) {  // no-flow boundary: face simply absent
          const double tn = harm(i, j, i, j + 1) / dx2;
          diag_flux[u] += tn;
          t_n[u] = tn;
        }
        if (j - 1 >= 0) {
          const double ts = harm(i, j, i, j - 1) / dx2;
          diag_flux[u] += ts;
          t_s[u] = ts;
        }
      }
  }

  // y = (storage + flux operator) x
  void apply(double storage, const std::vector<double>& x, std::vector<double>& y) const {
    const int n = n_unknowns();
    for (int u = 0; u < n; ++u) y[u] = (storage + diag_flux[u]) * x[u];
    for (int i = 1; i < nx - 1; ++i)
      for (int j = 0; j < ny; ++j) {
        const int u = uidx(i, j);
        double s = 0.0;
        if (t_e[u] != 0.0) s += t_e[u] * x[uidx(i + 1, j)];
        if (t_w[u] != 0.0) s += t_w[u] * x[uidx(i - 1, j)];
        if (t_n[u] != 0.0) s += t_n[u] * x[uidx(i, j + 1)];
        if (t_s[u] != 0.0) s += t_s[u] * x[uidx(i, j - 1)];
        y[u] -= s;
      }
  }

  // Jacobi-preconditioned conjugate gradient to absolute residual tol.
  void solve(double storage, const std::vector<double>& rhs, std::vector<double>& x,
             double tol) const {
    const int n = n_unknowns();
    std::vector<double> r(n), z(n), p(n), ap(n);
    apply(storage, x, ap);
    for (int u = 0; u < n; ++u) r[u] = rhs[u] - ap[u];
    auto precond = [&](const std::vector<double>& in, std::vector<double>& out) {
      for (int u = 0; u < n; ++u) out[u] = in[u] / (storage + diag_flux[u]);
    };
    precond(r, z);
    p = z;
    double rz = 0.0;
    for (int u = 0; u < n; ++u) rz += r[u] * z[u];
    for (int it = 0; it < 20000; ++it) {
      double rnorm = 0.0;
      for (int u = 0; u < n; ++u) rnorm += r[u] * r[u];
      if (std::sqrt(rnorm) <= tol) return;
      apply(storage, p, ap);
      double pap = 0.0;
      for (int u = 0; u < n; ++u) pap += p[u] * ap[u];
      const double alpha = rz / pap;
      for (int u = 0; u < n; ++u) {
        x[u] += alpha * p[u];
        r[u] -= alpha * ap[u];
      }
      precond(r, z);
      double rz_new = 0.0;
      for (int u = 0; u < n; ++u) rz_new += r[u] * z[u];
      const double beta = rz_new / rz;
      rz = rz_new;
      for (int u = 0; u < n; ++u) p[u] = z[u] + beta * p[u];
    }
    throw std::runtime_error("fd_solve: CG did not reach tolerance");
  }
};

Array initial_grid(int nx, int ny) {
  Array g = Array::full(nx, ny, kHeadRight);
  for (int j = 0; j < ny; ++j) g.at(0, j) = kHeadLeft;
  return g;
}

Array grid_from_unknowns(const FdSystem& sys, const std::vector<double>& u) {
  Array g = Array::uninit(sys.nx, sys.ny);
  for (int j = 0; j < sys.ny; ++j) {
    g.at(0, j) = kHeadLeft;
    g.at(sys.nx - 1, j) = kHeadRight;
  }
  for (int i = 1; i < sys.nx - 1; ++i)
    for (int j = 0; j < sys.ny; ++j) g.at(i, j) = u[sys.uidx(i, j)];
  return g;
}

void check_max_principle(const Array& g) {
  constexpr double slack = 1e-8;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (g.data()[k] < kHeadRight - slack || g.data()[k] > kHeadLeft + slack)
      throw std::runtime_error("fd_solve: head outside [200, 202]");
}

std::vector<double> step_rhs(const FdSystem& sys, double storage, const std::vector<double>& h_old) {
  std::vector<double> rhs(sys.n_unknowns());
  for (int u = 0; u < sys.n_unknowns(); ++u)
    rhs[u] = storage * h_old[u] + sys.rhs_dirichlet[u];
  return rhs;
}

}  // namespace

HeadSnapshots fd_solve(const ConductivityField& field, const FdOptions& opt) {
  HeadSnapshots snaps;
  snaps.dt = opt.dt;
  const FdSystem sys(field, snaps.nx, snaps.ny, snaps.spacing);
  snaps.initial = initial_grid(snaps.nx, snaps.ny);

  const double storage = opt.s_storage / opt.dt;
  std::vector<double> h(sys.n_unknowns(), kHeadRight);
  for (int s = 0; s < opt.steps; ++s) {
    const std::vector<double> rhs = step_rhs(sys, storage, h);
    sys.solve(storage, rhs, h, opt.cg_tol);
    Array g = grid_from_unknowns(sys, h);
    check_max_principle(g);
    snaps.heads.push_back(std::move(g));
  }
  return snaps;
}

Array fd_run_extra(const ConductivityField& field, const Array& start, int extra_steps, double dt,
                   double s_storage, double cg_tol) {
  const FdSystem sys(field, start.rows(), start.cols(), 20.0);
  const double storage = s_storage / dt;
  std::vector<double> h(sys.n_unknowns());
  for (int i = 1; i < sys.nx - 1; ++i)
    for (int j = 0; j < sys.ny; ++j) h[sys.uidx(i, j)] = start.at(i, j);
  for (int s = 0; s < extra_steps; ++s) {
    const std::vector<double> rhs = step_rhs(sys, storage, h);
    sys.solve(storage, rhs, h, cg_tol);
  }
  return grid_from_unknowns(sys, h);
}

double steady_flux_imbalance(const ConductivityField& field, const Array& heads) {
  const FdSystem sys(field, heads.rows(), heads.cols(), 20.0);
  std::vector<double> h(sys.n_unknowns());
  for (int i = 1; i < sys.nx - 1; ++i)
    for (int j = 0; j < sys.ny; ++j) h[sys.uidx(i, j)] = heads.at(i, j);
  std::vector<double> flux(sys.n_unknowns());
  sys.apply(0.0, h, flux);
  double worst = 0.0;
  for (int u = 0; u < sys.n_unknowns(); ++u)
    worst = std::max(worst, std::fabs(flux[u] - sys.rhs_dirichlet[u]));
  return worst;
}

double interp_head(const HeadSnapshots& snaps, double x, double y, double t) {
  auto bilinear = [&](const Array& g) {
    const double fx = std::clamp(x / snaps.spacing, 0.0, snaps.nx - 1.0);
    const double fy = std::clamp(y / snaps.spacing, 0.0, snaps.ny - 1.0);
    const int i0 = std::min(static_cast<int>(fx), snaps.nx - 2);
    const int j0 = std::min(static_cast<int>(fy), snaps.ny - 2);
    const double ax = fx - i0, ay = fy - j0;
    return (1 - ax) * (1 - ay) * g.at(i0, j0) + ax * (1 - ay) * g.at(i0 + 1, j0) +
           (1 - ax) * ay * g.at(i0, j0 + 1) + ax * ay * g.at(i0 + 1, j0 + 1);
  };
  if (t <= 0) return bilinear(snaps.initial);
  const double ft = t / snaps.dt;
  const int s1 = std::min(static_cast<int>(std::ceil(ft)), snaps.steps());
  const int s0 = s1 - 1;
  const double at = std::clamp(ft - s0, 0.0, 1.0);
  const Array& g0 = s0 == 0 ? snaps.initial : snaps.heads[s0 - 1];
  const Array& g1 = snaps.heads[s1 - 1];
  return (1 - at) * bilinear(g0) + at * bilinear(g1);
}

SnapshotStack sp_snapshot_stack(const HeadSnapshots& snaps) {
  SnapshotStack stack;
  const int n_nodes = snaps.nx * snaps.ny;
  stack.node_coords = Array::uninit(n_nodes, 2);
  for (int i = 0; i < snaps.nx; ++i)
    for (int j = 0; j < snaps.ny; ++j) {
      stack.node_coords.at(i * snaps.ny + j, 0) = i * snaps.spacing;
      stack.node_coords.at(i * snaps.ny + j, 1) = j * snaps.spacing;
    }
  for (int s = 0; s < snaps.steps(); ++s) {
    stack.times.push_back((s + 1) * snaps.dt);
    Array v = Array::uninit(n_nodes, 1);
    for (int k = 0; k < n_nodes; ++k) v.mut()[k] = snaps.heads[s].data()[k];
    stack.values.push_back(std::move(v));
  }
  return stack;
}

namespace {

WeakBatch build_weak_sp(const ConductivityField& field, const Array& centers,
                        const double half[3], int quad_points, double s_storage) {
  WeakBatch weak;
  weak.regions = centers.rows();
  const QuadRule1D rule = gauss_legendre(quad_points);
  const std::vector<QuadRule1D> rules{rule, rule, rule};
  weak.q = quad_points * quad_points * quad_points;
  weak.points = Array::uninit(weak.regions * weak.q, 3);
  weak.coef_a = Array::uninit(weak.regions, weak.q);
  for (int r = 0; r < weak.regions; ++r) {
    const Subdomain region{{centers.at(r, 0), centers.at(r, 1), centers.at(r, 2)},
                           {half[0], half[1], half[2]}};
    const TensorRule tr = tensor_rule(rules, region);
    for (int qi = 0; qi < weak.q; ++qi) {
      const double p[3] = {tr.points.at(qi, 0), tr.points.at(qi, 1), tr.points.at(qi, 2)};
      for (int d = 0; d < 3; ++d) weak.points.at(r * weak.q + qi, d) = p[d];
      const TestFnEval om = omega_sp(p, region);
      double k, kx, ky;
      field.eval(p[0], p[1], k, kx, ky);
      // Fully transferred form: r_i = -sum w_q h [S_s w_t + (K w_x)_x + (K w_y)_y]
      weak.coef_a.at(r, qi) =
          -tr.weights[qi] *
          (s_storage * om.d_dt + kx * om.d_dx + k * om.d2_dx2 + ky * om.d_dy + k * om.d2_dy2);
    }
  }
  return weak;
}

}  // namespace

Problem sp_problem(const ConductivityField& field, const HeadSnapshots& snaps,
                   const SpProblemConfig& cfg) {
  Problem prob;
  prob.kind = ProblemKind::SinglePhase;
  prob.surrogate.input_scale = {kDomain, kDomain, kTimeLength};
  prob.surrogate.out_scale = 1.0;
  prob.surrogate.out_shift = 201.0;
  prob.s_storage = 1e-4;

  const SnapshotStack stack = sp_snapshot_stack(snaps);
  prob.data = build_training_set(stack, cfg.data_per_step, cfg.train_steps, cfg.seed_data);
  if (cfg.noise > 0) {
    Rng mix(cfg.seed_data);
    mix.next_u64();
    prob.data = add_noise(prob.data, cfg.noise, mix.next_u64());
  }

  Rng seeds(cfg.seed_sampler);
  const std::uint64_t seed_ic = seeds.next_u64();
  const std::uint64_t seed_bc_left = seeds.next_u64();
  const std::uint64_t seed_bc_right = seeds.next_u64();
  const std::uint64_t seed_regions = seeds.next_u64();

  {
    // h(x, y, 0) = 202 on the left edge, 200 elsewhere.
    TrainSet ic;
    Array xy = latin_hypercube(cfg.ic_points, {{0.0, kDomain}, {0.0, kDomain}}, seed_ic);
    ic.coords = Array::uninit(cfg.ic_points, 3);
    ic.labels = Array::uninit(cfg.ic_points, 1);
    for (int i = 0; i < cfg.ic_points; ++i) {
      ic.coords.at(i, 0) = xy.at(i, 0);
      ic.coords.at(i, 1) = xy.at(i, 1);
      ic.coords.at(i, 2) = 0.0;
      ic.labels.mut()[i] = xy.at(i, 0) == 0.0 ? kHeadLeft : kHeadRight;
    }
    ic.noise_scale = Array::zeros(cfg.ic_points, 1);
    prob.ic = ic;
  }
  {
    // Dirichlet faces: h = 202 at x = 0, h = 200 at x = 1020.
    const int n_left = cfg.bc_points / 2;
    const int n_right = cfg.bc_points - n_left;
    Array left = latin_hypercube(n_left, {{0.0, kDomain}, {0.0, kTimeLength}}, seed_bc_left);
    Array right = latin_hypercube(n_right, {{0.0, kDomain}, {0.0, kTimeLength}}, seed_bc_right);
    TrainSet bc;
    bc.coords = Array::uninit(cfg.bc_points, 3);
    bc.labels = Array::uninit(cfg.bc_points, 1);
    for (int i = 0; i < n_left; ++i) {
      bc.coords.at(i, 0) = 0.0;
      bc.coords.at(i, 1) = left.at(i, 0);
      bc.coords.at(i, 2) = left.at(i, 1);
      bc.labels.mut()[i] = kHeadLeft;
    }
    for (int i = 0; i < n_right; ++i) {
      bc.coords.at(n_left + i, 0) = kDomain;
      bc.coords.at(n_left + i, 1) = right.at(i, 0);
      bc.coords.at(n_left + i, 2) = right.at(i, 1);
      bc.labels.mut()[n_left + i] = kHeadRight;
    }
    bc.noise_scale = Array::zeros(cfg.bc_points, 1);
    prob.bc = bc;
  }

  if (cfg.model == Model::TgnnWf && cfg.collocation > 0) {
    prob.theory = TheoryKind::WeakSP;
    const double half[3] = {0.5 * cfg.region_rel_size * kDomain,
                            0.5 * cfg.region_rel_size * kDomain,
                            0.5 * cfg.region_rel_size * kTimeLength};
    const Array centers = latin_hypercube(
        cfg.collocation,
        {{half[0], kDomain - half[0]}, {half[1], kDomain - half[1]}, {half[2], kTimeLength - half[2]}},
        seed_regions);
    prob.weak = build_weak_sp(field, centers, half, cfg.quad_points, prob.s_storage);
  } else if (cfg.model == Model::Tgnn && cfg.collocation > 0) {
    prob.theory = TheoryKind::StrongSP;
    StrongBatchSP batch;
    batch.points = latin_hypercube(
        cfg.collocation, {{0.0, kDomain}, {0.0, kDomain}, {0.0, kTimeLength}}, seed_regions);
    batch.k = Array::uninit(cfg.collocation, 1);
    batch.kx = Array::uninit(cfg.collocation, 1);
    batch.ky = Array::uninit(cfg.collocation, 1);
    for (int i = 0; i < cfg.collocation; ++i) {
      double k, kx, ky;
      field.eval(batch.points.at(i, 0), batch.points.at(i, 1), k, kx, ky);
      batch.k.mut()[i] = k;
      batch.kx.mut()[i] = kx;
      batch.ky.mut()[i] = ky;
    }
    prob.strong_sp = batch;
  }

  // Prediction window: remaining timesteps on the full grid.
  const int n_nodes = stack.n_nodes();
  const int eval_steps = stack.n_steps() - cfg.train_steps;
  prob.eval_coords = Array::uninit(eval_steps * n_nodes, 3);
  prob.eval_truth = Array::uninit(eval_steps * n_nodes, 1);
  int row = 0;
  for (int s = cfg.train_steps; s < stack.n_steps(); ++s)
    for (int i = 0; i < n_nodes; ++i, ++row) {
      prob.eval_coords.at(row, 0) = stack.node_coords.at(i, 0);
      prob.eval_coords.at(row, 1) = stack.node_coords.at(i, 1);
      prob.eval_coords.at(row, 2) = stack.times[s];
      prob.eval_truth.mut()[row] = stack.values[s].data()[i];
    }
  return prob;
}

void save_field(const ConductivityField& field, const std::filesystem::path& file) {
  std::FILE* f = std::fopen(file.string().c_str(), "w");
  if (!f) throw std::runtime_error("save_field: cannot open " + file.string());
  auto write_basis = [&](const Kle1D& b) {
    std::fprintf(f, "basis %zu %a %a\n", b.freq.size(), b.length, b.eta);
    for (std::size_t k = 0; k < b.freq.size(); ++k)
      std::fprintf(f, "%d %a %a %a\n", static_cast<int>(b.even[k]), b.freq[k], b.lambda[k],
                   b.norm[k]);
  };
  std::fprintf(f, "lnk-field 1 %zu\n", field.modes.size());
  write_basis(field.basis_x);
  write_basis(field.basis_y);
  for (std::size_t n = 0; n < field.modes.size(); ++n)
    std::fprintf(f, "%d %d %a %a\n", field.modes[n].ix, field.modes[n].iy,
                 field.modes[n].sqrt_lambda, field.xi[n]);
  // ln K on the reference grid, for inspection and plotting
  std::fprintf(f, "grid 51 51\n");
  for (int i = 0; i < 51; ++i)
    for (int j = 0; j < 51; ++j)
      std::fprintf(f, "%a%c", field.ln_k(i * 20.0, j * 20.0), j == 50 ? '\n' : ' ');
  std::fclose(f);
}

ConductivityField load_field(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("load_field: cannot open " + file.string());
  std::string magic;
  int version = 0;
  std::size_t n_modes = 0;
  if (!(in >> magic >> version >> n_modes) || magic != "lnk-field" || version != 1)
    throw std::runtime_error("load_field: bad header");
  auto read_basis = [&](Kle1D& b) {
    std::string tag;
    std::size_t n = 0;
    std::string len, eta;
    if (!(in >> tag >> n >> len >> eta) || tag != "basis")
      throw std::runtime_error("load_field: bad basis header");
    b.length = std::strtod(len.c_str(), nullptr);
    b.eta = std::strtod(eta.c_str(), nullptr);
    for (std::size_t k = 0; k < n; ++k) {
      int even = 0;
      std::string w, l, nr;
      if (!(in >> even >> w >> l >> nr)) throw std::runtime_error("load_field: truncated basis");
      b.even.push_back(static_cast<char>(even));
      b.freq.push_back(std::strtod(w.c_str(), nullptr));
      b.lambda.push_back(std::strtod(l.c_str(), nullptr));
      b.norm.push_back(std::strtod(nr.c_str(), nullptr));
    }
  };
  ConductivityField field;
  read_basis(field.basis_x);
  read_basis(field.basis_y);
  for (std::size_t n = 0; n < n_modes; ++n) {
    ConductivityField::Mode m;
    std::string sl, xi;
    if (!(in >> m.ix >> m.iy >> sl >> xi)) throw std::runtime_error("load_field: truncated modes");
    m.sqrt_lambda = std::strtod(sl.c_str(), nullptr);
    field.modes.push_back(m);
    field.xi.push_back(std::strtod(xi.c_str(), nullptr));
  }
  return field;
}

namespace {

void write_grid_csv(const Array& g, const std::filesystem::path& file) {
  std::FILE* f = std::fopen(file.string().c_str(), "w");
  if (!f) throw std::runtime_error("save_snapshots: cannot open " + file.string());
  for (int i = 0; i < g.rows(); ++i)
    for (int j = 0; j < g.cols(); ++j)
      std::fprintf(f, "%.17g%c", g.at(i, j), j + 1 == g.cols() ? '\n' : ',');
  std::fclose(f);
}

Array read_grid_csv(const std::filesystem::path& file, int rows, int cols) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("load_snapshots: cannot open " + file.string());
  Array g = Array::uninit(rows, cols);
  std::string cell;
  for (std::size_t k = 0; k < g.size(); ++k) {
    char sep = (k + 1) % cols == 0 ? '\n' : ',';
    if (!std::getline(in, cell, sep)) throw std::runtime_error("load_snapshots: truncated grid");
    g.mut()[k] = std::strtod(cell.c_str(), nullptr);
  }
  return g;
}

std::string step_name(int s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "heads_%03d.csv", s);
  return buf;
}

}  // namespace

void save_snapshots(const HeadSnapshots& snaps, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream meta(dir / "snapshots.meta");
  meta << snaps.nx << " " << snaps.ny << " " << snaps.spacing << " " << snaps.dt << " "
       << snaps.steps() << "\n";
  write_grid_csv(snaps.initial, dir / step_name(0));
  for (int s = 0; s < snaps.steps(); ++s) write_grid_csv(snaps.heads[s], dir / step_name(s + 1));
}

HeadSnapshots load_snapshots(const std::filesystem::path& dir) {
  std::ifstream meta(dir / "snapshots.meta");
  if (!meta) throw std::runtime_error("load_snapshots: missing meta file");
  HeadSnapshots snaps;
  int steps = 0;
  meta >> snaps.nx >> snaps.ny >> snaps.spacing >> snaps.dt >> steps;
  snaps.initial = read_grid_csv(dir / step_name(0), snaps.nx, snaps.ny);
  for (int s = 0; s < steps; ++s)
    snaps.heads.push_back(read_grid_csv(dir / step_name(s + 1), snaps.nx, snaps.ny));
  return snaps;
}

}  // namespace tgnnwf
