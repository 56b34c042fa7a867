#include "tgnnwf/testfuncs.hpp"

#include <cmath>
#include <stdexcept>

namespace tgnnwf {

namespace {

double normalized(const double* point, const Subdomain& region, int k, const char* what) {
  const double u = (point[k] - region.center[k]) / region.half[k];
  if (std::fabs(u) > 1.0 + 1e-12)
    throw std::domain_error(std::string(what) + ": point outside region along axis " +
                            std::to_string(k));
  return u;
}

}  // namespace

TestFnEval omega_sp(const double* point, const Subdomain& region) {
  if (region.dim() != 3) throw std::invalid_argument("omega_sp: region must be 3-D (x, y, t)");
  const double xb = normalized(point, region, 0, "omega_sp");
  const double yb = normalized(point, region, 1, "omega_sp");
  const double tb = normalized(point, region, 2, "omega_sp");
  const double hx = region.half[0], hy = region.half[1], ht = region.half[2];

  const double X = xb * xb - 1.0;
  const double Y = yb * yb - 1.0;
  const double T = tb * tb - 1.0;
  TestFnEval e;
  e.value = X * X * Y * Y * T;
  e.d_dx = 4.0 * xb * X * Y * Y * T / hx;
  e.d2_dx2 = (12.0 * xb * xb - 4.0) * Y * Y * T / (hx * hx);
  e.d_dy = 4.0 * yb * Y * X * X * T / hy;
  e.d2_dy2 = (12.0 * yb * yb - 4.0) * X * X * T / (hy * hy);
  e.d_dt = X * X * Y * Y * 2.0 * tb / ht;
  return e;
}

TestFnEval omega_bl(const double* point, const Subdomain& region) {
  if (region.dim() != 2) throw std::invalid_argument("omega_bl: region must be 2-D (tau, t)");
  const double ub = normalized(point, region, 0, "omega_bl");
  const double tb = normalized(point, region, 1, "omega_bl");
  const double hu = region.half[0], ht = region.half[1];

  const double U = ub * ub - 1.0;
  const double T = tb * tb - 1.0;
  TestFnEval e;
  e.value = U * T;
  e.d_dx = 2.0 * ub * T / hu;
  e.d_dt = U * 2.0 * tb / ht;
  return e;
}

TestFnEval omega_bl_diffusion(const double* point, const Subdomain& region) {
  if (region.dim() != 2)
    throw std::invalid_argument("omega_bl_diffusion: region must be 2-D (tau, t)");
  const double ub = normalized(point, region, 0, "omega_bl_diffusion");
  const double tb = normalized(point, region, 1, "omega_bl_diffusion");
  const double hu = region.half[0], ht = region.half[1];

  const double U = ub * ub - 1.0;
  const double T = tb * tb - 1.0;
  TestFnEval e;
  e.value = U * U * T;
  e.d_dx = 4.0 * ub * U * T / hu;
  e.d2_dx2 = (12.0 * ub * ub - 4.0) * T / (hu * hu);
  e.d_dt = U * U * 2.0 * tb / ht;
  return e;
}

}  // namespace tgnnwf
