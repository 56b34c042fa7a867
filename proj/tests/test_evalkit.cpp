#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "tgnnwf/evalkit.hpp"

using namespace tgnnwf;
using test::random_array;

namespace {

SnapshotStack toy_stack(int n_nodes, int n_steps) {
  SnapshotStack stack;
  stack.node_coords = Array::uninit(n_nodes, 2);
  for (int i = 0; i < n_nodes; ++i) {
    stack.node_coords.at(i, 0) = i * 1.0;
    stack.node_coords.at(i, 1) = i * 2.0;
  }
  for (int s = 0; s < n_steps; ++s) {
    stack.times.push_back(0.1 * (s + 1));
    Array v = Array::uninit(n_nodes, 1);
    for (int i = 0; i < n_nodes; ++i) v.mut()[i] = std::sin(0.3 * i) * (s + 1);
    stack.values.push_back(std::move(v));
  }
  return stack;
}

}  // namespace

TEST_CASE("rel_l2 basics and loop oracle") {
  const Array t = Array::from(3, 1, {1.0, 2.0, 3.0});
  CHECK(rel_l2(t, t) == 0.0);
  CHECK(rel_l2(ew_scale(t, 2.0), t) == doctest::Approx(1.0));
  CHECK_THROWS_AS(rel_l2(Array::zeros(3, 1), Array::zeros(3, 1)), std::invalid_argument);

  Rng rng(3);
  const Array pred = random_array(rng, 40, 1);
  const Array truth = random_array(rng, 40, 1, 0.5, 2.0);
  double num = 0, den = 0;
  for (int i = 0; i < 40; ++i) {
    num += (pred.data()[i] - truth.data()[i]) * (pred.data()[i] - truth.data()[i]);
    den += truth.data()[i] * truth.data()[i];
  }
  CHECK(rel_l2(pred, truth) == doctest::Approx(std::sqrt(num / den)));
}

TEST_CASE("r2 basics and loop oracle") {
  const Array t = Array::from(4, 1, {1.0, 2.0, 3.0, 4.0});
  CHECK(r2(t, t) == doctest::Approx(1.0));
  CHECK(r2(Array::full(4, 1, 2.5), t) == doctest::Approx(0.0));
  CHECK_THROWS_AS(r2(t, Array::full(4, 1, 1.0)), std::invalid_argument);

  Rng rng(5);
  const Array pred = random_array(rng, 25, 1);
  const Array truth = random_array(rng, 25, 1);
  double mean = 0;
  for (int i = 0; i < 25; ++i) mean += truth.data()[i] / 25;
  double res = 0, tot = 0;
  for (int i = 0; i < 25; ++i) {
    res += std::pow(pred.data()[i] - truth.data()[i], 2);
    tot += std::pow(truth.data()[i] - mean, 2);
  }
  CHECK(r2(pred, truth) == doctest::Approx(1.0 - res / tot));
}

TEST_CASE("metrics are invariant under permutation of point pairs") {
  Rng rng(7);
  const Array pred = random_array(rng, 30, 1);
  const Array truth = random_array(rng, 30, 1, 0.5, 2.0);
  std::vector<int> perm = rng.permutation(30);
  Array pred_p = Array::uninit(30, 1), truth_p = Array::uninit(30, 1);
  for (int i = 0; i < 30; ++i) {
    pred_p.mut()[i] = pred.data()[perm[i]];
    truth_p.mut()[i] = truth.data()[perm[i]];
  }
  CHECK(rel_l2(pred_p, truth_p) == doctest::Approx(rel_l2(pred, truth)).epsilon(1e-13));
  CHECK(r2(pred_p, truth_p) == doctest::Approx(r2(pred, truth)).epsilon(1e-13));
}

TEST_CASE("build_training_set sampling contract") {
  const SnapshotStack stack = toy_stack(20, 6);
  const TrainSet set = build_training_set(stack, 10, 3, 42);
  CHECK(set.size() == 30);
  CHECK(set.coords.cols() == 3);

  // labels match the stack values at the sampled node/time
  for (int i = 0; i < set.size(); ++i) {
    const double t = set.coords.at(i, 2);
    int step = -1;
    for (int s = 0; s < 3; ++s)
      if (stack.times[s] == t) step = s;
    REQUIRE(step >= 0);
    const double x = set.coords.at(i, 0);
    const int node = static_cast<int>(x + 0.5);
    CHECK(set.labels.data()[i] == stack.values[step].data()[node]);
  }

  const TrainSet none = build_training_set(stack, 0, 3, 42);
  CHECK(none.empty());
  CHECK_THROWS_AS(build_training_set(stack, 21, 3, 42), std::invalid_argument);

  const TrainSet again = build_training_set(stack, 10, 3, 42);
  for (std::size_t k = 0; k < set.coords.size(); ++k)
    CHECK(set.coords.data()[k] == again.coords.data()[k]);
}

TEST_CASE("noise scale is the range over the training window") {
  const SnapshotStack stack = toy_stack(20, 6);
  const TrainSet set = build_training_set(stack, 20, 4, 1);
  for (int i = 0; i < set.size(); ++i) {
    const int node = static_cast<int>(set.coords.at(i, 0) + 0.5);
    double lo = 1e300, hi = -1e300;
    for (int s = 0; s < 4; ++s) {
      lo = std::min(lo, stack.values[s].data()[node]);
      hi = std::max(hi, stack.values[s].data()[node]);
    }
    CHECK(set.noise_scale.data()[i] == doctest::Approx(hi - lo));
  }
}

TEST_CASE("add_noise contract") {
  const SnapshotStack stack = toy_stack(30, 5);
  const TrainSet clean = build_training_set(stack, 30, 5, 9);

  const TrainSet zero = add_noise(clean, 0.0, 17);
  for (int i = 0; i < clean.size(); ++i) CHECK(zero.labels.data()[i] == clean.labels.data()[i]);

  const TrainSet noisy = add_noise(clean, 0.8, 17);
  for (int i = 0; i < clean.size(); ++i) {
    const double dev = std::fabs(noisy.labels.data()[i] - clean.labels.data()[i]);
    CHECK(dev <= 0.8 * clean.noise_scale.data()[i] + 1e-15);
  }

  // linear in the noise fraction under a fixed seed
  const TrainSet twice = add_noise(clean, 1.6, 17);
  for (int i = 0; i < clean.size(); ++i) {
    const double d1 = noisy.labels.data()[i] - clean.labels.data()[i];
    const double d2 = twice.labels.data()[i] - clean.labels.data()[i];
    CHECK(d2 == doctest::Approx(2.0 * d1).epsilon(1e-14));
  }
}

TEST_CASE("add_noise deviations average to zero and fill the band") {
  // Monte-Carlo check of the eps ~ U[-1,1] model.
  TrainSet set;
  const int n = 100000;
  set.coords = Array::zeros(n, 2);
  set.labels = Array::zeros(n, 1);
  set.noise_scale = Array::full(n, 1, 1.0);
  const TrainSet noisy = add_noise(set, 1.0, 23);
  double mean = 0, maxdev = 0;
  for (int i = 0; i < n; ++i) {
    mean += noisy.labels.data()[i] / n;
    maxdev = std::max(maxdev, std::fabs(noisy.labels.data()[i]));
  }
  CHECK(std::fabs(mean) < 0.01);   // ~3 sigma for U[-1,1]/sqrt(n)
  CHECK(maxdev <= 1.0);
  CHECK(maxdev > 0.99);
}
