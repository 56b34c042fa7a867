#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "tgnnwf/tape.hpp"

using namespace tgnnwf;
using test::fd_grad;
using test::max_rel_err;
using test::random_array;
using test::rel_err;

TEST_CASE("record forward values match direct evaluation") {
  Tape t;
  const DiffValue in1[] = {DiffValue::constant(2.0), DiffValue::constant(3.0)};
  CHECK(t.record(PrimOp::Mul, in1).value.item() == doctest::Approx(6.0));

  const DiffValue in2[] = {DiffValue::constant(0.0)};
  CHECK(t.record(PrimOp::Softplus, in2).value.item() == doctest::Approx(std::log(2.0)));
  CHECK(t.record(PrimOp::Tanh, in2).value.item() == doctest::Approx(0.0));
}

TEST_CASE("record rejects shape mismatches") {
  Tape t;
  DiffValue a(Array::zeros(2, 3)), b(Array::zeros(3, 3));
  CHECK_THROWS_AS(t.add(a, b), std::invalid_argument);
  CHECK_THROWS_AS(t.matmul(a, DiffValue(Array::zeros(2, 2))), std::invalid_argument);
}

TEST_CASE("grad power rule and sigmoid value") {
  Tape t;
  DiffValue x = t.leaf(Array::scalar(3.0));
  DiffValue y = t.square(x);
  const DiffValue wrt[] = {x};
  CHECK(t.grad(y, wrt)[0].item() == doctest::Approx(6.0));

  Tape t2;
  DiffValue x2 = t2.leaf(Array::scalar(0.0));
  DiffValue y2 = t2.softplus(x2);
  const DiffValue wrt2[] = {x2};
  CHECK(t2.grad(y2, wrt2)[0].item() == doctest::Approx(0.5));
}

TEST_CASE("grad of sum(W x) matches finite differences") {
  Rng rng(42);
  Array w = random_array(rng, 4, 6);
  Array x = random_array(rng, 6, 1);
  auto f = [](const std::vector<Array>& p) {
    return reduce_sum(matmul(p[0], p[1])).item();
  };
  const std::vector<Array> fd = fd_grad(f, {w, x}, 1e-5);

  Tape t;
  DiffValue wv = t.leaf(w), xv = t.leaf(x);
  DiffValue y = t.sum(t.matmul(wv, xv));
  const DiffValue wrt[] = {wv, xv};
  const std::vector<Array> ad = t.grad(y, wrt);
  CHECK(max_rel_err(ad[0], fd[0]) < 1e-6);
  CHECK(max_rel_err(ad[1], fd[1]) < 1e-6);
}

TEST_CASE("grad rejects non-scalar outputs and off-tape wrt") {
  Tape t;
  DiffValue x = t.leaf(Array::zeros(2, 2));
  const DiffValue wrt[] = {x};
  CHECK_THROWS_AS(t.grad(t.square(x), wrt), std::invalid_argument);
  DiffValue c = DiffValue::constant(1.0);
  const DiffValue bad[] = {c};
  CHECK_THROWS_AS(t.grad(t.sum(x), bad), std::invalid_argument);
}

TEST_CASE("every primitive agrees with central finite differences") {
  // Scalar-valued compositions exercising each op, checked over 100 seeds.
  struct Case {
    const char* name;
    std::function<DiffValue(Tape&, const std::vector<DiffValue>&)> build;
    std::function<double(const std::vector<Array>&)> eval;
    int n_inputs;
    double lo, hi;
  };
  const std::vector<Case> cases = {
      {"add", [](Tape& t, const std::vector<DiffValue>& v) { return t.sum(t.add(v[0], v[1])); },
       [](const std::vector<Array>& p) { return reduce_sum(ew_add(p[0], p[1])).item(); }, 2, -1, 1},
      {"sub", [](Tape& t, const std::vector<DiffValue>& v) { return t.sum(t.sub(v[0], v[1])); },
       [](const std::vector<Array>& p) { return reduce_sum(ew_sub(p[0], p[1])).item(); }, 2, -1, 1},
      {"mul", [](Tape& t, const std::vector<DiffValue>& v) { return t.sum(t.mul(v[0], v[1])); },
       [](const std::vector<Array>& p) { return reduce_sum(ew_mul(p[0], p[1])).item(); }, 2, -1, 1},
      {"div", [](Tape& t, const std::vector<DiffValue>& v) { return t.sum(t.div(v[0], v[1])); },
       [](const std::vector<Array>& p) { return reduce_sum(ew_div(p[0], p[1])).item(); }, 2, 0.5, 2},
      {"matmul",
       [](Tape& t, const std::vector<DiffValue>& v) { return t.sum(t.matmul(v[0], v[1])); },
       [](const std::vector<Array>& p) { return reduce_sum(matmul(p[0], p[1])).item(); }, 2, -1, 1},
      {"pow", [](Tape& t, const std::vector<DiffValue>& v) { return t.sum(t.pow(v[0], 2.5)); },
       [](const std::vector<Array>& p) { return reduce_sum(ew_pow(p[0], 2.5)).item(); }, 1, 0.5, 2},
      {"exp", [](Tape& t, const std::vector<DiffValue>& v) { return t.sum(t.exp(v[0])); },
       [](const std::vector<Array>& p) { return reduce_sum(ew_exp(p[0])).item(); }, 1, -1, 1},
      {"ln", [](Tape& t, const std::vector<DiffValue>& v) { return t.sum(t.ln(v[0])); },
       [](const std::vector<Array>& p) { return reduce_sum(ew_ln(p[0])).item(); }, 1, 0.5, 2},
      {"tanh", [](Tape& t, const std::vector<DiffValue>& v) { return t.sum(t.tanh(v[0])); },
       [](const std::vector<Array>& p) { return reduce_sum(ew_tanh(p[0])).item(); }, 1, -2, 2},
      {"softplus", [](Tape& t, const std::vector<DiffValue>& v) { return t.sum(t.softplus(v[0])); },
       [](const std::vector<Array>& p) { return reduce_sum(ew_softplus(p[0])).item(); }, 1, -2, 2},
      {"sum", [](Tape& t, const std::vector<DiffValue>& v) { return t.square(t.sum(v[0])); },
       [](const std::vector<Array>& p) { return std::pow(reduce_sum(p[0]).item(), 2); }, 1, -1, 1},
      {"mean", [](Tape& t, const std::vector<DiffValue>& v) { return t.square(t.mean(v[0])); },
       [](const std::vector<Array>& p) { return std::pow(reduce_mean(p[0]).item(), 2); }, 1, -1, 1},
      {"square", [](Tape& t, const std::vector<DiffValue>& v) { return t.sum(t.square(v[0])); },
       [](const std::vector<Array>& p) { return reduce_sum(ew_square(p[0])).item(); }, 1, -1, 1},
      {"rowsum",
       [](Tape& t, const std::vector<DiffValue>& v) { return t.sum(t.square(t.rowsum(v[0]))); },
       [](const std::vector<Array>& p) { return reduce_sum(ew_square(row_sum(p[0]))).item(); }, 1,
       -1, 1},
      {"colsum",
       [](Tape& t, const std::vector<DiffValue>& v) { return t.sum(t.square(t.colsum(v[0]))); },
       [](const std::vector<Array>& p) { return reduce_sum(ew_square(col_sum(p[0]))).item(); }, 1,
       -1, 1},
      {"broadcast-bias",
       [](Tape& t, const std::vector<DiffValue>& v) { return t.sum(t.square(t.add(v[0], v[1]))); },
       [](const std::vector<Array>& p) { return reduce_sum(ew_square(ew_add(p[0], p[1]))).item(); },
       -2, -1, 1},  // second input is a broadcast row
  };

  for (const Case& c : cases) {
    CAPTURE(c.name);
    double worst = 0.0;
    for (int seed = 0; seed < 100; ++seed) {
      Rng rng(1000 + seed);
      std::vector<Array> params;
      if (c.n_inputs == -2) {
        params.push_back(random_array(rng, 3, 4, c.lo, c.hi));
        params.push_back(random_array(rng, 1, 4, c.lo, c.hi));
      } else {
        params.push_back(random_array(rng, 3, 4, c.lo, c.hi));
        if (c.n_inputs == 2)
          params.push_back(std::string(c.name) == "matmul" ? random_array(rng, 4, 2, c.lo, c.hi)
                                                           : random_array(rng, 3, 4, c.lo, c.hi));
      }
      const std::vector<Array> fd = fd_grad(c.eval, params, 1e-6);
      Tape t;
      std::vector<DiffValue> leaves;
      for (const Array& p : params) leaves.push_back(t.leaf(p));
      DiffValue y = c.build(t, leaves);
      const std::vector<Array> ad = t.grad(y, leaves);
      for (std::size_t i = 0; i < params.size(); ++i)
        worst = std::max(worst, max_rel_err(ad[i], fd[i], 1e-6));
    }
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("linearity of grad") {
  Rng rng(7);
  Array x0 = random_array(rng, 3, 3);
  const double a = 1.7, b = -0.6;
  Tape t;
  DiffValue x = t.leaf(x0);
  DiffValue f = t.sum(t.square(x));
  DiffValue g = t.sum(t.exp(x));
  DiffValue combo = t.add(t.scale(f, a), t.scale(g, b));
  const DiffValue wrt[] = {x};
  const Array grad_combo = t.grad(combo, wrt)[0];
  const Array gf = t.grad(f, wrt)[0];
  const Array gg = t.grad(g, wrt)[0];
  const Array expect = ew_add(ew_scale(gf, a), ew_scale(gg, b));
  CHECK(max_rel_err(grad_combo, expect) < 1e-12);
}

TEST_CASE("zero rules") {
  Tape t;
  DiffValue x = t.leaf(Array::scalar(2.0));
  DiffValue unrelated = t.leaf(Array::zeros(2, 2));
  DiffValue y = t.square(x);
  const DiffValue wrt[] = {unrelated};
  const Array g = t.grad(y, wrt)[0];
  CHECK(max_abs(g) == 0.0);
  CHECK(g.rows() == 2);
  CHECK(g.cols() == 2);

  // constant output
  DiffValue c = DiffValue::constant(5.0);
  const DiffValue wrt2[] = {x};
  CHECK(max_abs(t.grad(c, wrt2)[0]) == 0.0);
}

TEST_CASE("input_derivative of x^3") {
  auto cube = [](Tape& t, const DiffValue& x) { return t.sum(t.pow(x, 3.0)); };
  Tape t;
  DiffValue d1 = input_derivative(t, cube, Array::scalar(2.0), 0, 1);
  CHECK(d1.value.item() == doctest::Approx(12.0));
  Tape t2;
  DiffValue d2 = input_derivative(t2, cube, Array::scalar(2.0), 0, 2);
  CHECK(d2.value.item() == doctest::Approx(12.0));
  Tape t3;
  CHECK_THROWS_AS(input_derivative(t3, cube, Array::scalar(2.0), 0, 3), std::invalid_argument);
}

namespace {

// Small smooth two-parameter test function: f(x) = sum(w * tanh(v * x)).
DiffValue smooth_fn(Tape& t, const DiffValue& x, const DiffValue& w, const DiffValue& v) {
  return t.sum(t.mul(w, t.tanh(t.mul(v, x))));
}

}  // namespace

TEST_CASE("input_derivative matches second-order central differences") {
  Rng rng(11);
  Array w0 = random_array(rng, 1, 4), v0 = random_array(rng, 1, 4);
  const double x0 = 0.37;

  auto eval = [&](double x) {
    Tape t;
    return smooth_fn(t, DiffValue(Array::scalar(x)), DiffValue(w0), DiffValue(v0)).value.item();
  };
  const double h = 1e-3;
  const double fd2 = (eval(x0 + h) - 2.0 * eval(x0) + eval(x0 - h)) / (h * h);

  Tape t;
  DiffValue w = t.leaf(w0), v = t.leaf(v0);
  auto f = [&](Tape& tt, const DiffValue& x) { return smooth_fn(tt, x, w, v); };
  DiffValue d2 = input_derivative(t, f, Array::scalar(x0), 0, 2);
  CHECK(rel_err(d2.value.item(), fd2, 1e-8) < 1e-4);
}

TEST_CASE("nesting: parameter gradient of a second-order input derivative") {
  Rng rng(13);
  Array w0 = random_array(rng, 1, 4), v0 = random_array(rng, 1, 4);
  const double x0 = 0.25;

  auto d2_of = [&](const std::vector<Array>& p) {
    Tape t;
    DiffValue w = t.leaf(p[0]), v = t.leaf(p[1]);
    auto f = [&](Tape& tt, const DiffValue& x) { return smooth_fn(tt, x, w, v); };
    return input_derivative(t, f, Array::scalar(x0), 0, 2).value.item();
  };
  const std::vector<Array> fd = fd_grad(d2_of, {w0, v0}, 1e-5);

  Tape t;
  DiffValue w = t.leaf(w0), v = t.leaf(v0);
  auto f = [&](Tape& tt, const DiffValue& x) { return smooth_fn(tt, x, w, v); };
  DiffValue d2 = input_derivative(t, f, Array::scalar(x0), 0, 2);
  const DiffValue wrt[] = {w, v};
  const std::vector<Array> ad = t.grad(d2, wrt);
  CHECK(max_rel_err(ad[0], fd[0], 1e-7) < 1e-4);
  CHECK(max_rel_err(ad[1], fd[1], 1e-7) < 1e-4);
}

TEST_CASE("replay reproduces recorded forward values bit-exactly") {
  Rng rng(3);
  Tape t;
  DiffValue a = t.leaf(random_array(rng, 3, 3));
  DiffValue b = t.leaf(random_array(rng, 3, 3, 0.5, 1.5));
  DiffValue y = t.mean(t.square(t.tanh(t.matmul(a, t.softplus(b)))));
  // also push the recorded backward onto the tape
  const DiffValue wrt[] = {a, b};
  t.grad_recorded(y, wrt);
  for (int node = 0; node < static_cast<int>(t.node_count()); ++node) {
    const Array replayed = t.replay(node);
    const Array& stored = t.value_of(node);
    REQUIRE(replayed.size() == stored.size());
    for (std::size_t k = 0; k < stored.size(); ++k)
      REQUIRE(replayed.data()[k] == stored.data()[k]);
  }
}

TEST_CASE("DiffValue without a node behaves as a constant") {
  Tape t;
  DiffValue x = t.leaf(Array::scalar(2.0));
  DiffValue c(Array::scalar(10.0));  // no node
  DiffValue y = t.mul(x, c);
  const DiffValue wrt[] = {x};
  CHECK(t.grad(y, wrt)[0].item() == doctest::Approx(10.0));
}
