#pragma once

#include "tgnnwf/quadrature.hpp"

namespace tgnnwf {

// Analytic evaluation of a compactly supported test function and its partial
// derivatives at one physical point of one subdomain. Unused slots stay zero.
struct TestFnEval {
  double value = 0;
  double d_dt = 0;
  double d_dx = 0;   // d/dtau for the Buckley-Leverett families
  double d2_dx2 = 0;
  double d_dy = 0;
  double d2_dy2 = 0;
};

// (x_^2-1)^2 (y_^2-1)^2 (t_^2-1) on an (x, y, t) region; vanishes together
// with its first x/y derivatives on the region boundary.
TestFnEval omega_sp(const double* point, const Subdomain& region);

// (tau_^2-1)(t_^2-1) on a (tau, t) region.
TestFnEval omega_bl(const double* point, const Subdomain& region);

// (tau_^2-1)^2 (t_^2-1); additionally d/dtau vanishes at the tau boundary,
// as the second-order diffusion term requires.
TestFnEval omega_bl_diffusion(const double* point, const Subdomain& region);

}  // namespace tgnnwf
