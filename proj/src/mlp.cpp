#include "tgnnwf/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tgnnwf/rng.hpp"

namespace tgnnwf {

std::string activation_name(Activation a) {
  return a == Activation::Softplus ? "softplus" : "tanh";
}

Activation activation_from_name(const std::string& s) {
  if (s == "softplus") return Activation::Softplus;
  if (s == "tanh") return Activation::Tanh;
  throw std::invalid_argument("unknown activation: " + s);
}

MlpParams init_mlp(const std::vector<int>& layer_sizes, Activation activation, std::uint64_t seed) {
  if (layer_sizes.size() < 2)
    throw std::invalid_argument("init_mlp: need at least input and output sizes");
  for (int s : layer_sizes)
    if (s < 1) throw std::invalid_argument("init_mlp: layer sizes must be >= 1");

  MlpParams mlp;
  mlp.layer_sizes = layer_sizes;
  mlp.activation = activation;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Array w = Array::uninit(fan_in, fan_out);
    for (std::size_t k = 0; k < w.size(); ++k) w.mut()[k] = rng.uniform(-limit, limit);
    mlp.weights.push_back(std::move(w));
    mlp.biases.push_back(Array::zeros(1, fan_out));
  }
  return mlp;
}

MlpRefs attach_mlp(Tape& tape, const MlpParams& mlp) {
  MlpRefs refs;
  for (int l = 0; l < mlp.n_layers(); ++l) {
    refs.params.push_back(tape.leaf(mlp.weights[l]));
    refs.params.push_back(tape.leaf(mlp.biases[l]));
  }
  return refs;
}

DiffValue mlp_forward(Tape& tape, const MlpParams& mlp, const MlpRefs& refs, const DiffValue& x) {
  if (x.value.cols() != mlp.input_dim())
    throw std::invalid_argument("mlp_forward: input width " + std::to_string(x.value.cols()) +
                                " != declared dim " + std::to_string(mlp.input_dim()));
  DiffValue h = x;
  const int n = mlp.n_layers();
  for (int l = 0; l < n; ++l) {
    h = tape.add(tape.matmul(h, refs.weight(l)), refs.bias(l));
    if (l + 1 < n)
      h = mlp.activation == Activation::Softplus ? tape.softplus(h) : tape.tanh(h);
  }
  return h;
}

Array mlp_eval(const MlpParams& mlp, const Array& x) {
  if (x.cols() != mlp.input_dim())
    throw std::invalid_argument("mlp_eval: input width mismatch");
  Array h = x;
  const int n = mlp.n_layers();
  for (int l = 0; l < n; ++l) {
    h = ew_add(matmul(h, mlp.weights[l]), mlp.biases[l]);
    if (l + 1 < n) h = mlp.activation == Activation::Softplus ? ew_softplus(h) : ew_tanh(h);
  }
  return h;
}

std::vector<Array> mlp_flat_params(const MlpParams& mlp) {
  std::vector<Array> flat;
  for (int l = 0; l < mlp.n_layers(); ++l) {
    flat.push_back(mlp.weights[l]);
    flat.push_back(mlp.biases[l]);
  }
  return flat;
}

void mlp_set_flat_params(MlpParams& mlp, const std::vector<Array>& flat) {
  if (flat.size() != 2 * mlp.weights.size())
    throw std::invalid_argument("mlp_set_flat_params: array count mismatch");
  for (int l = 0; l < mlp.n_layers(); ++l) {
    check_same_shape(flat[2 * l], mlp.weights[l], "set_flat_params");
    check_same_shape(flat[2 * l + 1], mlp.biases[l], "set_flat_params");
    mlp.weights[l] = flat[2 * l];
    mlp.biases[l] = flat[2 * l + 1];
  }
}

namespace {

void write_array(std::FILE* f, const Array& a) {
  std::fprintf(f, "%d %d\n", a.rows(), a.cols());
  for (std::size_t k = 0; k < a.size(); ++k)
    std::fprintf(f, "%a%c", a.data()[k], k + 1 == a.size() ? '\n' : ' ');
}

Array read_array(std::istream& in) {
  int rows = 0, cols = 0;
  if (!(in >> rows >> cols)) throw std::runtime_error("checkpoint: bad array header");
  Array a = Array::uninit(rows, cols);
  for (std::size_t k = 0; k < a.size(); ++k) {
    std::string tok;
    if (!(in >> tok)) throw std::runtime_error("checkpoint: truncated array");
    a.mut()[k] = std::strtod(tok.c_str(), nullptr);
  }
  return a;
}

}  // namespace

void save_mlp(const MlpParams& mlp, const std::filesystem::path& file) {
  std::FILE* f = std::fopen(file.string().c_str(), "w");
  if (!f) throw std::runtime_error("save_mlp: cannot open " + file.string());
  std::fprintf(f, "mlp 1 %s %zu\n", activation_name(mlp.activation).c_str(), mlp.layer_sizes.size());
  for (std::size_t i = 0; i < mlp.layer_sizes.size(); ++i)
    std::fprintf(f, "%d%c", mlp.layer_sizes[i], i + 1 == mlp.layer_sizes.size() ? '\n' : ' ');
  for (int l = 0; l < mlp.n_layers(); ++l) {
    write_array(f, mlp.weights[l]);
    write_array(f, mlp.biases[l]);
  }
  std::fclose(f);
}

MlpParams load_mlp(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("load_mlp: cannot open " + file.string());
  std::string magic, act;
  int version = 0;
  std::size_t n_sizes = 0;
  if (!(in >> magic >> version >> act >> n_sizes) || magic != "mlp" || version != 1)
    throw std::runtime_error("load_mlp: bad header in " + file.string());
  MlpParams mlp;
  mlp.activation = activation_from_name(act);
  mlp.layer_sizes.resize(n_sizes);
  for (auto& s : mlp.layer_sizes)
    if (!(in >> s)) throw std::runtime_error("load_mlp: truncated layer sizes");
  for (std::size_t l = 0; l + 1 < n_sizes; ++l) {
    mlp.weights.push_back(read_array(in));
    mlp.biases.push_back(read_array(in));
  }
  return mlp;
}

}  // namespace tgnnwf
