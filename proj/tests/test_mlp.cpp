#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "test_support.hpp"
#include "tgnnwf/mlp.hpp"

using namespace tgnnwf;
using test::fd_grad;
using test::max_rel_err;
using test::random_array;

TEST_CASE("init_mlp validates sizes and is deterministic") {
  CHECK_THROWS_AS(init_mlp({}, Activation::Tanh, 1), std::invalid_argument);
  CHECK_THROWS_AS(init_mlp({3}, Activation::Tanh, 1), std::invalid_argument);
  CHECK_THROWS_AS(init_mlp({3, 0, 1}, Activation::Tanh, 1), std::invalid_argument);

  const MlpParams a = init_mlp({3, 50, 50, 1}, Activation::Softplus, 99);
  const MlpParams b = init_mlp({3, 50, 50, 1}, Activation::Softplus, 99);
  for (int l = 0; l < a.n_layers(); ++l) {
    for (std::size_t k = 0; k < a.weights[l].size(); ++k)
      CHECK(a.weights[l].data()[k] == b.weights[l].data()[k]);
    CHECK(max_abs(a.biases[l]) == 0.0);
  }
}

TEST_CASE("init_mlp respects the Glorot-uniform range") {
  const MlpParams m = init_mlp({10, 20, 1}, Activation::Tanh, 5);
  const double limit0 = std::sqrt(6.0 / (10 + 20));
  CHECK(max_abs(m.weights[0]) <= limit0);
  CHECK(max_abs(m.weights[0]) > 0.5 * limit0);  // not degenerate
}

TEST_CASE("paper architectures build") {
  const MlpParams sp = init_mlp({3, 50, 50, 50, 50, 50, 50, 50, 1}, Activation::Softplus, 1);
  CHECK(sp.n_layers() == 8);
  CHECK(sp.weights[0].rows() == 3);
  CHECK(sp.weights[7].cols() == 1);
  const MlpParams bl = init_mlp({2, 20, 20, 20, 20, 20, 20, 20, 20, 1}, Activation::Tanh, 1);
  CHECK(bl.n_layers() == 9);
}

TEST_CASE("forward: zero-parameter softplus net propagates ln 2") {
  MlpParams m = init_mlp({2, 4, 1}, Activation::Softplus, 3);
  m.weights[0] = Array::zeros(2, 4);
  m.weights[1] = Array::full(4, 1, 1.0);  // output = sum of hidden activations
  m.biases[0] = Array::zeros(1, 4);
  m.biases[1] = Array::zeros(1, 1);
  const Array out = mlp_eval(m, Array::from(1, 2, {0.3, -0.7}));
  CHECK(out.item() == doctest::Approx(4.0 * std::log(2.0)));
}

TEST_CASE("forward: single linear layer is the affine map") {
  MlpParams m;
  m.layer_sizes = {1, 1};
  m.activation = Activation::Softplus;
  m.weights.push_back(Array::from(1, 1, {2.0}));
  m.biases.push_back(Array::from(1, 1, {1.0}));
  CHECK(mlp_eval(m, Array::scalar(3.0)).item() == doctest::Approx(7.0));
}

TEST_CASE("forward rejects width mismatches") {
  const MlpParams m = init_mlp({3, 4, 1}, Activation::Tanh, 1);
  CHECK_THROWS_AS(mlp_eval(m, Array::zeros(5, 2)), std::invalid_argument);
}

TEST_CASE("batch forward equals row-by-row forward exactly") {
  Rng rng(17);
  const MlpParams m = init_mlp({3, 8, 8, 2}, Activation::Tanh, 21);
  const Array batch = random_array(rng, 16, 3);
  const Array full = mlp_eval(m, batch);
  for (int i = 0; i < batch.rows(); ++i) {
    Array row = Array::uninit(1, 3);
    for (int j = 0; j < 3; ++j) row.at(0, j) = batch.at(i, j);
    const Array one = mlp_eval(m, row);
    for (int j = 0; j < 2; ++j) CHECK(one.at(0, j) == full.at(i, j));
  }
}

TEST_CASE("tape forward matches tape-free forward") {
  Rng rng(23);
  const MlpParams m = init_mlp({2, 6, 1}, Activation::Softplus, 31);
  const Array x = random_array(rng, 5, 2);
  Tape t;
  const MlpRefs refs = attach_mlp(t, m);
  const DiffValue y = mlp_forward(t, m, refs, DiffValue(x));
  const Array direct = mlp_eval(m, x);
  for (std::size_t k = 0; k < direct.size(); ++k) CHECK(y.value.data()[k] == direct.data()[k]);
}

TEST_CASE("gradient of mean squared output matches finite differences") {
  Rng rng(29);
  const MlpParams m = init_mlp({2, 5, 4, 1}, Activation::Softplus, 37);
  const Array x = random_array(rng, 12, 2);

  auto loss = [&](const std::vector<Array>& flat) {
    MlpParams mm = m;
    mlp_set_flat_params(mm, flat);
    return reduce_mean(ew_square(mlp_eval(mm, x))).item();
  };
  const std::vector<Array> flat = mlp_flat_params(m);
  const std::vector<Array> fd = fd_grad(loss, flat, 1e-6);

  Tape t;
  const MlpRefs refs = attach_mlp(t, m);
  const DiffValue y = t.mean(t.square(mlp_forward(t, m, refs, DiffValue(x))));
  const std::vector<Array> ad = t.grad(y, refs.params);
  for (std::size_t i = 0; i < flat.size(); ++i) CHECK(max_rel_err(ad[i], fd[i], 1e-7) < 1e-5);
}

TEST_CASE("tanh net with zero biases is odd in its input") {
  Rng rng(41);
  MlpParams m = init_mlp({1, 6, 1}, Activation::Tanh, 43);
  m.biases[0] = Array::zeros(1, 6);  // keep hidden preactivations odd
  m.biases[1] = Array::zeros(1, 1);
  const Array x = random_array(rng, 7, 1);
  const Array pos = mlp_eval(m, x);
  const Array neg = mlp_eval(m, ew_neg(x));
  for (int i = 0; i < x.rows(); ++i) CHECK(pos.data()[i] == doctest::Approx(-neg.data()[i]));
}

TEST_CASE("checkpoint round-trips bit-exactly") {
  const MlpParams m = init_mlp({3, 9, 4, 2}, Activation::Tanh, 57);
  const auto file = std::filesystem::temp_directory_path() / "tgnnwf_mlp_roundtrip.txt";
  save_mlp(m, file);
  const MlpParams r = load_mlp(file);
  CHECK(r.activation == m.activation);
  REQUIRE(r.layer_sizes == m.layer_sizes);
  for (int l = 0; l < m.n_layers(); ++l) {
    for (std::size_t k = 0; k < m.weights[l].size(); ++k)
      CHECK(r.weights[l].data()[k] == m.weights[l].data()[k]);
    for (std::size_t k = 0; k < m.biases[l].size(); ++k)
      CHECK(r.biases[l].data()[k] == m.biases[l].data()[k]);
  }
  std::filesystem::remove(file);
}
