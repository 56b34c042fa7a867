#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>

#include "tgnnwf/problem.hpp"

namespace tgnnwf {

// Declarative description of one experiment. Parsed from a flat key=value
// file ('#' starts a comment); unset keys take per-problem defaults.
struct ExperimentConfig {
  ProblemKind problem = ProblemKind::SinglePhase;
  Model model = Model::TgnnWf;
  int data_per_step = 0;
  int collocation = 0;  // weak-form regions, or strong-form points
  double region_rel_size = -1;  // subdomain length / domain length
  int quad_points = -1;         // Gauss-Legendre points per dimension
  double noise = 0.0;
  double eta = 0.0;
  int epochs = -1;
  double learning_rate = 1e-3;
  double dual_step_size = 1.25;
  int ic_points = -1;
  int bc_points = -1;
  std::uint64_t seed_field = 1;
  std::uint64_t seed_data = 2;
  std::uint64_t seed_sampler = 3;
  std::uint64_t seed_init = 4;

  std::string fingerprint() const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& file);

// Fills the -1 sentinels with per-problem defaults and checks invariants
// (e.g. model=dnn forbids collocation). Throws std::invalid_argument.
void finalize_config(ExperimentConfig& cfg);

}  // namespace tgnnwf
