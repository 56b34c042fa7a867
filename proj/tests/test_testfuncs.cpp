#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "test_support.hpp"
#include "tgnnwf/testfuncs.hpp"

using namespace tgnnwf;

namespace {

using EvalFn = std::function<TestFnEval(const double*, const Subdomain&)>;

// Relative error against the derivative's natural scale (1/H per order), so
// points where a partial happens to cross zero do not blow up the ratio.
double deriv_rel_err(double got, double fd, double scale) {
  return std::fabs(got - fd) / std::max({std::fabs(got), std::fabs(fd), scale});
}

// Central-difference oracle for all reported partials at one point. The
// second derivative uses a 5-point stencil, exact for the quartic factors.
void check_partials(const EvalFn& fn, const Subdomain& region, const double* p, bool second_x,
                    bool has_y) {
  const TestFnEval e = fn(p, region);
  const int t_axis = has_y ? 2 : 1;
  auto value_at = [&](int axis, double delta) {
    double q[3] = {p[0], p[1], has_y ? p[2] : 0.0};
    q[axis] += delta;
    return fn(q, region).value;
  };
  for (int axis = 0; axis < (has_y ? 3 : 2); ++axis) {
    const double h = 1e-6 * region.half[axis];
    const double fd1 = (value_at(axis, h) - value_at(axis, -h)) / (2 * h);
    const double got = axis == 0 ? e.d_dx : (axis == t_axis ? e.d_dt : e.d_dy);
    CHECK(deriv_rel_err(got, fd1, 1.0 / region.half[axis]) < 1e-8);
  }
  if (second_x) {
    auto fd2_5pt = [&](int axis) {
      const double h = 4e-3 * region.half[axis];
      return (-value_at(axis, 2 * h) + 16 * value_at(axis, h) - 30 * e.value +
              16 * value_at(axis, -h) - value_at(axis, -2 * h)) /
             (12 * h * h);
    };
    const double hx = region.half[0];
    CHECK(deriv_rel_err(e.d2_dx2, fd2_5pt(0), 1.0 / (hx * hx)) < 1e-8);
    if (has_y) {
      const double hy = region.half[1];
      CHECK(deriv_rel_err(e.d2_dy2, fd2_5pt(1), 1.0 / (hy * hy)) < 1e-8);
    }
  }
}

}  // namespace

TEST_CASE("omega_sp center value and boundary behavior") {
  const Subdomain region{{500.0, 400.0, 5.0}, {102.0, 102.0, 1.0}};
  const double center[3] = {500.0, 400.0, 5.0};
  CHECK(omega_sp(center, region).value == doctest::Approx(-1.0));

  // x normalized to exactly +1: value and d/dx vanish
  const double face[3] = {602.0, 430.0, 5.3};
  const TestFnEval e = omega_sp(face, region);
  CHECK(e.value == 0.0);
  CHECK(e.d_dx == 0.0);

  const double outside[3] = {603.0, 400.0, 5.0};
  CHECK_THROWS_AS(omega_sp(outside, region), std::domain_error);
}

TEST_CASE("omega_sp partials match finite differences at random points") {
  const Subdomain region{{510.0, 510.0, 5.0}, {102.0, 102.0, 1.0}};
  Rng rng(31);
  for (int it = 0; it < 1000; ++it) {
    double p[3];
    for (int k = 0; k < 3; ++k)
      p[k] = region.center[k] + 0.95 * region.half[k] * rng.uniform_sym();
    check_partials([](const double* q, const Subdomain& r) { return omega_sp(q, r); }, region, p,
                   true, true);
  }
}

TEST_CASE("omega_sp vanishes on every face, d/dx and d/dy on theirs") {
  // binary-exact region so faces land exactly on normalized +/-1
  const Subdomain region{{0.5, 0.5, 0.5}, {0.25, 0.25, 0.25}};
  Rng rng(5);
  for (int axis = 0; axis < 3; ++axis)
    for (int side = -1; side <= 1; side += 2) {
      double p[3] = {0.4375, 0.5625, 0.625};
      p[axis] = region.center[axis] + side * region.half[axis];
      const TestFnEval e = omega_sp(p, region);
      CHECK(e.value == 0.0);
      if (axis == 0) CHECK(e.d_dx == 0.0);
      if (axis == 1) CHECK(e.d_dy == 0.0);
    }
}

TEST_CASE("omega_bl values and partials") {
  const Subdomain region{{0.5, 0.5}, {0.25, 0.25}};
  const double center[2] = {0.5, 0.5};
  CHECK(omega_bl(center, region).value == doctest::Approx(1.0));

  const double face[2] = {0.75, 0.5};  // tau normalized to exactly +1
  CHECK(omega_bl(face, region).value == 0.0);

  const Subdomain tiny{{0.5, 0.5}, {0.004, 0.004}};
  Rng rng(37);
  for (int it = 0; it < 1000; ++it) {
    double p[2];
    for (int k = 0; k < 2; ++k) p[k] = tiny.center[k] + 0.95 * tiny.half[k] * rng.uniform_sym();
    check_partials([](const double* q, const Subdomain& r) { return omega_bl(q, r); }, tiny, p,
                   false, false);
  }
}

TEST_CASE("omega_bl_diffusion values and partials") {
  const Subdomain region{{0.5, 0.5}, {0.25, 0.25}};
  const double center[2] = {0.5, 0.5};
  CHECK(omega_bl_diffusion(center, region).value == doctest::Approx(-1.0));

  // tau face: value and d/dtau both vanish (required by the second-order term)
  const double face[2] = {0.75, 0.5};
  const TestFnEval e = omega_bl_diffusion(face, region);
  CHECK(e.value == 0.0);
  CHECK(e.d_dx == 0.0);

  const Subdomain tiny{{0.3, 0.6}, {0.004, 0.004}};
  Rng rng(41);
  for (int it = 0; it < 1000; ++it) {
    double p[2];
    for (int k = 0; k < 2; ++k) p[k] = tiny.center[k] + 0.95 * tiny.half[k] * rng.uniform_sym();
    check_partials([](const double* q, const Subdomain& r) { return omega_bl_diffusion(q, r); },
                   tiny, p, true, false);
  }
}
