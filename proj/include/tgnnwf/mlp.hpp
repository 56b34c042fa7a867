#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tgnnwf/tape.hpp"

namespace tgnnwf {

enum class Activation { Softplus, Tanh };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& s);

// Fully-connected network parameters. Weights are stored input-major
// (fan_in x fan_out) so a batch of rows maps through X @ W + b; biases are
// 1 x fan_out rows. The output layer is affine (no activation).
struct MlpParams {
  std::vector<int> layer_sizes;
  Activation activation = Activation::Softplus;
  std::vector<Array> weights;
  std::vector<Array> biases;

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  int n_layers() const { return static_cast<int>(weights.size()); }
};

// Glorot-uniform weights (+/- sqrt(6/(fan_in+fan_out))), zero biases,
// deterministic for a given seed.
MlpParams init_mlp(const std::vector<int>& layer_sizes, Activation activation, std::uint64_t seed);

// Tape handles for every parameter array, in [W0, b0, W1, b1, ...] order.
struct MlpRefs {
  std::vector<DiffValue> params;
  const DiffValue& weight(int layer) const { return params[2 * layer]; }
  const DiffValue& bias(int layer) const { return params[2 * layer + 1]; }
};

MlpRefs attach_mlp(Tape& tape, const MlpParams& mlp);

// Forward pass of a batch (rows = samples). Input width must equal the
// declared input dim.
DiffValue mlp_forward(Tape& tape, const MlpParams& mlp, const MlpRefs& refs, const DiffValue& x);

// Tape-free forward evaluation (same kernels and order as mlp_forward).
Array mlp_eval(const MlpParams& mlp, const Array& x);

// Parameter arrays in tape order; used by the optimizer.
std::vector<Array> mlp_flat_params(const MlpParams& mlp);
void mlp_set_flat_params(MlpParams& mlp, const std::vector<Array>& flat);

// Text checkpoint (hex floats; round-trips bit-exactly).
void save_mlp(const MlpParams& mlp, const std::filesystem::path& file);
MlpParams load_mlp(const std::filesystem::path& file);

}  // namespace tgnnwf
