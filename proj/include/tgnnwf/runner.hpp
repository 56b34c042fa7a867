#pragma once

#include <filesystem>
#include <vector>

#include "tgnnwf/config.hpp"
#include "tgnnwf/evalkit.hpp"
#include "tgnnwf/optimizer.hpp"

namespace tgnnwf {

// Builds the configured problem and the matching network architecture.
Problem build_problem(const ExperimentConfig& cfg);
MlpParams build_network(const ExperimentConfig& cfg);
TrainConfig build_train_config(const ExperimentConfig& cfg);

struct RunResult {
  MetricsReport metrics;
  bool aborted = false;
  std::string abort_reason;
};

// Runs one experiment end to end and writes metrics.csv, history.csv,
// predictions.csv, profiles.csv and model.txt into out_dir.
RunResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

// Runs every config in manifest order, tolerating per-run failures, and
// writes matrix.csv (one row per run; N/A markers on failures).
void run_matrix(const std::filesystem::path& manifest, const std::filesystem::path& out_dir);

// Emits reference solutions only (conductivity field + head snapshots, or
// the analytic saturation table).
void emit_reference(ProblemKind kind, const std::filesystem::path& out_dir,
                    std::uint64_t seed_field);

}  // namespace tgnnwf
