#pragma once

#include <cstdint>
#include <filesystem>

#include "tgnnwf/problem.hpp"

namespace tgnnwf {

// One-dimensional eigenpairs of the exponential covariance exp(-|dx|/eta) on
// [0, L]. Eigenfunctions are cos/sin about the interval midpoint; frequencies
// come from the standard transcendental root problem.
struct Kle1D {
  double length = 0;
  double eta = 0;
  std::vector<double> freq;    // w_k, ascending
  std::vector<double> lambda;  // 2c / (w^2 + c^2), descending
  std::vector<double> norm;    // L2 normalization constant
  std::vector<char> even;

  double eval(int k, double x) const;
  double eval_deriv(int k, double x) const;
};

Kle1D kle_1d(double length, double eta, int n_terms);

// Truncated KLE of ln K with separable exponential covariance, unit variance
// and zero mean. Keeps the top n_terms 2-D eigenpairs (products of 1-D ones).
struct ConductivityField {
  Kle1D basis_x, basis_y;
  struct Mode {
    int ix = 0, iy = 0;
    double sqrt_lambda = 0;
  };
  std::vector<Mode> modes;  // sorted by eigenvalue, descending
  std::vector<double> xi;   // standard-normal coefficients

  double ln_k(double x, double y) const;
  // K, dK/dx, dK/dy
  void eval(double x, double y, double& k, double& kx, double& ky) const;
};

ConductivityField kle_build(double length_x, double length_y, double eta_x, double eta_y,
                            int n_terms, std::uint64_t seed);

// Reference solution of the single-phase flow equation on the 51x51 grid:
// backward-Euler stepping, harmonic-mean transmissibilities, Dirichlet
// heads 202/200 on the left/right columns, no-flow top and bottom.
struct HeadSnapshots {
  int nx = 51, ny = 51;
  double spacing = 20.0;
  double dt = 0.2;
  Array initial;             // nx x ny, t = 0
  std::vector<Array> heads;  // one nx x ny array per step, t = dt..steps*dt
  int steps() const { return static_cast<int>(heads.size()); }
};

struct FdOptions {
  int steps = 50;
  double dt = 0.2;
  double s_storage = 1e-4;
  double cg_tol = 1e-10;
};

HeadSnapshots fd_solve(const ConductivityField& field, const FdOptions& opt = {});

// Continue stepping from the last snapshot (used to reach steady state).
Array fd_run_extra(const ConductivityField& field, const Array& start, int extra_steps, double dt,
                   double s_storage = 1e-4, double cg_tol = 1e-12);

// Residual of the steady (zero-storage) discrete operator at each interior
// cell; near zero once the transient has died out.
double steady_flux_imbalance(const ConductivityField& field, const Array& heads);

// Tri-linear (space bilinear x time linear) interpolation of the snapshots.
double interp_head(const HeadSnapshots& snaps, double x, double y, double t);

struct SpProblemConfig {
  int data_per_step = 1000;
  int train_steps = 18;
  int collocation = 10000;  // weak-form regions or strong-form points
  double region_rel_size = 0.2;
  int quad_points = 5;
  int ic_points = 10000;
  int bc_points = 20000;
  double noise = 0.0;
  Model model = Model::TgnnWf;
  std::uint64_t seed_data = 2;
  std::uint64_t seed_sampler = 3;
};

Problem sp_problem(const ConductivityField& field, const HeadSnapshots& snaps,
                   const SpProblemConfig& cfg);

// Weak-form coefficients of the fully transferred single-phase form for
// regions centered at `centers` (n x 3) with per-axis half-lengths.
WeakBatch build_weak_sp(const ConductivityField& field, const Array& centers,
                        const double half[3], int quad_points, double s_storage);

SnapshotStack sp_snapshot_stack(const HeadSnapshots& snaps);

// Exact-round-trip field and snapshot files.
void save_field(const ConductivityField& field, const std::filesystem::path& file);
ConductivityField load_field(const std::filesystem::path& file);
void save_snapshots(const HeadSnapshots& snaps, const std::filesystem::path& dir);
HeadSnapshots load_snapshots(const std::filesystem::path& dir);

}  // namespace tgnnwf
