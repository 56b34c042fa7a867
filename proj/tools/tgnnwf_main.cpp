#include <omp.h>

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "tgnnwf/runner.hpp"

namespace {

constexpr int kExitInvalidConfig = 2;
constexpr int kExitTrainingAbort = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weak- and strong-form theory-guided network training toolkit"};
  app.require_subcommand(1);

  std::string out_dir = "out";
  int threads = 0;
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--threads", threads, "worker threads (0 = hardware default)");

  std::string config_file;
  CLI::App* run = app.add_subcommand("run", "run one experiment from a config file");
  run->add_option("config", config_file, "key=value config file")->required();

  std::string manifest_file;
  CLI::App* matrix = app.add_subcommand("matrix", "run every config listed in a manifest");
  matrix->add_option("manifest", manifest_file, "text file with one config path per line")
      ->required();

  std::string ref_problem;
  std::uint64_t ref_seed = 1;
  CLI::App* reference = app.add_subcommand("reference", "emit reference solutions only");
  reference->add_option("problem", ref_problem, "singlephase or buckley")->required();
  reference->add_option("--seed-field", ref_seed, "conductivity field seed")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (run->parsed()) {
      tgnnwf::ExperimentConfig cfg;
      try {
        cfg = tgnnwf::load_config(config_file);
        tgnnwf::finalize_config(cfg);
      } catch (const std::invalid_argument& err) {
        std::fprintf(stderr, "invalid config: %s\n", err.what());
        return kExitInvalidConfig;
      }
      const tgnnwf::RunResult res = tgnnwf::run_experiment(cfg, out_dir);
      if (res.aborted) {
        std::fprintf(stderr, "training aborted: %s\n", res.abort_reason.c_str());
        return kExitTrainingAbort;
      }
      std::printf("l2=%.6g r2=%.6g lambda_f=%.6g seconds=%.1f\n", res.metrics.rel_l2,
                  res.metrics.r2, res.metrics.lambda_f_final, res.metrics.train_seconds);
    } else if (matrix->parsed()) {
      tgnnwf::run_matrix(manifest_file, out_dir);
    } else if (reference->parsed()) {
      tgnnwf::emit_reference(tgnnwf::problem_from_name(ref_problem), out_dir, ref_seed);
    }
  } catch (const std::invalid_argument& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kExitInvalidConfig;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
  return 0;
}
