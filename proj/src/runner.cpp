#include "tgnnwf/runner.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "tgnnwf/buckley.hpp"
#include "tgnnwf/singlephase.hpp"

namespace tgnnwf {

namespace {

constexpr double kFieldCorrelation = 0.2;  // correlation length / domain length

ConductivityField build_field(std::uint64_t seed) {
  return kle_build(1020.0, 1020.0, kFieldCorrelation * 1020.0, kFieldCorrelation * 1020.0, 20,
                   seed);
}

struct BuiltProblem {
  Problem problem;
  // kept for profile extraction
  HeadSnapshots snaps;  // single-phase only
  BLSolution bl_sol;    // buckley only
};

BuiltProblem build_problem_full(const ExperimentConfig& cfg) {
  BuiltProblem built;
  if (cfg.problem == ProblemKind::SinglePhase) {
    const ConductivityField field = build_field(cfg.seed_field);
    built.snaps = fd_solve(field);
    SpProblemConfig pc;
    pc.data_per_step = cfg.data_per_step;
    pc.collocation = cfg.collocation;
    pc.region_rel_size = cfg.region_rel_size;
    pc.quad_points = cfg.quad_points;
    pc.ic_points = cfg.ic_points;
    pc.bc_points = cfg.bc_points;
    pc.noise = cfg.noise;
    pc.model = cfg.model;
    pc.seed_data = cfg.seed_data;
    pc.seed_sampler = cfg.seed_sampler;
    built.problem = sp_problem(field, built.snaps, pc);
  } else {
    built.bl_sol = welge_shock(FracFlow{});
    BlProblemConfig pc;
    pc.data_per_step = cfg.data_per_step;
    pc.eta = cfg.eta;
    pc.regions = cfg.collocation;
    pc.region_half = 0.5 * cfg.region_rel_size;
    pc.quad_points = cfg.quad_points;
    pc.ic_points = cfg.ic_points;
    pc.bc_points = cfg.bc_points;
    pc.noise = cfg.noise;
    pc.model = cfg.model;
    pc.seed_data = cfg.seed_data;
    pc.seed_sampler = cfg.seed_sampler;
    built.problem = bl_problem(pc);
  }
  return built;
}

std::FILE* open_csv(const std::filesystem::path& file) {
  std::FILE* f = std::fopen(file.string().c_str(), "w");
  if (!f) throw std::runtime_error("cannot open output file " + file.string());
  return f;
}

void write_metrics_row(std::FILE* f, const ExperimentConfig& cfg, const char* l2, const char* r2,
                       const char* seconds, const char* lambda) {
  const int steps = cfg.problem == ProblemKind::SinglePhase ? 18 : 20;
  std::fprintf(f, "%s,%s,%d,%d,%.17g,%.17g,%s,%s,%s,%s\n", model_name(cfg.model).c_str(),
               problem_name(cfg.problem).c_str(), cfg.data_per_step * steps, cfg.collocation,
               cfg.noise, cfg.eta, l2, r2, seconds, lambda);
}

constexpr char kMetricsHeader[] =
    "model,problem,data_points,collocation,noise,eta,l2,r2,seconds,lambda_f_final\n";

void write_metrics(const std::filesystem::path& file, const ExperimentConfig& cfg,
                   const MetricsReport& m) {
  std::FILE* f = open_csv(file);
  std::fprintf(f, "%s", kMetricsHeader);
  char l2[64], r2[64], secs[64], lam[64];
  std::snprintf(l2, sizeof(l2), "%.17g", m.rel_l2);
  std::snprintf(r2, sizeof(r2), "%.17g", m.r2);
  std::snprintf(secs, sizeof(secs), "%.17g", m.train_seconds);
  std::snprintf(lam, sizeof(lam), "%.17g", m.lambda_f_final);
  write_metrics_row(f, cfg, l2, r2, secs, lam);
  std::fclose(f);
}

void write_history(const std::filesystem::path& file, const std::vector<EpochStats>& history) {
  std::FILE* f = open_csv(file);
  std::fprintf(f, "epoch,r_data,r_theory,r_ic,r_bc,lambda_f,loss,seconds\n");
  for (const EpochStats& e : history)
    std::fprintf(f, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", e.epoch, e.r_data,
                 e.r_theory, e.r_ic, e.r_bc, e.lambda_f, e.loss, e.seconds);
  std::fclose(f);
}

void write_predictions(const std::filesystem::path& file, const Problem& prob, const Array& pred) {
  std::FILE* f = open_csv(file);
  if (prob.kind == ProblemKind::SinglePhase)
    std::fprintf(f, "x,y,t,pred,truth\n");
  else
    std::fprintf(f, "tau,t,pred,truth\n");
  for (int i = 0; i < pred.rows(); ++i) {
    for (int j = 0; j < prob.eval_coords.cols(); ++j)
      std::fprintf(f, "%.17g,", prob.eval_coords.at(i, j));
    std::fprintf(f, "%.17g,%.17g\n", pred.data()[i], prob.eval_truth.data()[i]);
  }
  std::fclose(f);
}

// Head profiles along three horizontal lines at the final timestep, or
// saturation profiles at four prediction-window times.
void write_profiles(const std::filesystem::path& file, const BuiltProblem& built,
                    const MlpParams& mlp) {
  const Problem& prob = built.problem;
  std::FILE* f = open_csv(file);
  if (prob.kind == ProblemKind::SinglePhase) {
    std::fprintf(f, "profile,x,y,t,pred,truth\n");
    const HeadSnapshots& snaps = built.snaps;
    const double t_final = snaps.steps() * snaps.dt;
    for (double y : {320.0, 620.0, 920.0}) {
      const int j = static_cast<int>(y / snaps.spacing);
      Array coords = Array::uninit(snaps.nx, 3);
      for (int i = 0; i < snaps.nx; ++i) {
        coords.at(i, 0) = i * snaps.spacing;
        coords.at(i, 1) = y;
        coords.at(i, 2) = t_final;
      }
      const Array pred = surrogate_eval(mlp, prob.surrogate, coords);
      for (int i = 0; i < snaps.nx; ++i)
        std::fprintf(f, "y=%g,%.17g,%.17g,%.17g,%.17g,%.17g\n", y, coords.at(i, 0), y, t_final,
                     pred.data()[i], snaps.heads.back().at(i, j));
    }
  } else {
    std::fprintf(f, "profile,tau,t,pred,truth\n");
    for (double t : {0.44, 0.6, 0.8, 0.98}) {
      constexpr int n = 501;
      Array coords = Array::uninit(n, 2);
      for (int i = 0; i < n; ++i) {
        coords.at(i, 0) = i * 0.002;
        coords.at(i, 1) = t;
      }
      const Array pred = surrogate_eval(mlp, prob.surrogate, coords);
      for (int i = 0; i < n; ++i)
        std::fprintf(f, "t=%g,%.17g,%.17g,%.17g,%.17g\n", t, coords.at(i, 0), t, pred.data()[i],
                     analytic_S(built.bl_sol, coords.at(i, 0), t));
    }
  }
  std::fclose(f);
}

}  // namespace

Problem build_problem(const ExperimentConfig& cfg) { return build_problem_full(cfg).problem; }

MlpParams build_network(const ExperimentConfig& cfg) {
  if (cfg.problem == ProblemKind::SinglePhase)
    return init_mlp({3, 50, 50, 50, 50, 50, 50, 50, 1}, Activation::Softplus, cfg.seed_init);
  return init_mlp({2, 20, 20, 20, 20, 20, 20, 20, 20, 1}, Activation::Tanh, cfg.seed_init);
}

TrainConfig build_train_config(const ExperimentConfig& cfg) {
  TrainConfig tc;
  tc.epochs = cfg.epochs;
  tc.adam.lr = cfg.learning_rate;
  tc.dual_step_size = cfg.dual_step_size;
  tc.use_theory = cfg.model != Model::Dnn;
  return tc;
}

RunResult run_experiment(const ExperimentConfig& cfg_in, const std::filesystem::path& out_dir) {
  ExperimentConfig cfg = cfg_in;
  finalize_config(cfg);
  std::filesystem::create_directories(out_dir);

  const BuiltProblem built = build_problem_full(cfg);
  const MlpParams net0 = build_network(cfg);
  const TrainResult tr = train(built.problem, net0, build_train_config(cfg));

  RunResult out;
  out.aborted = tr.aborted;
  out.abort_reason = tr.abort_reason;
  if (tr.aborted) {
    save_mlp(tr.params, out_dir / "model.txt");
    write_history(out_dir / "history.csv", tr.history);
    return out;
  }

  const Array pred = surrogate_eval(tr.params, built.problem.surrogate, built.problem.eval_coords);
  out.metrics.rel_l2 = rel_l2(pred, built.problem.eval_truth);
  out.metrics.r2 = r2(pred, built.problem.eval_truth);
  out.metrics.train_seconds = tr.total_seconds;
  out.metrics.lambda_f_final = tr.lambda_f_final;
  out.metrics.fingerprint = cfg.fingerprint();

  write_metrics(out_dir / "metrics.csv", cfg, out.metrics);
  write_history(out_dir / "history.csv", tr.history);
  write_predictions(out_dir / "predictions.csv", built.problem, pred);
  write_profiles(out_dir / "profiles.csv", built, tr.params);
  save_mlp(tr.params, out_dir / "model.txt");
  return out;
}

void run_matrix(const std::filesystem::path& manifest, const std::filesystem::path& out_dir) {
  std::ifstream in(manifest);
  if (!in) throw std::invalid_argument("cannot open manifest " + manifest.string());
  std::vector<std::filesystem::path> entries;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string path;
    if (ls >> path) {
      std::filesystem::path p(path);
      entries.push_back(p.is_absolute() ? p : manifest.parent_path() / p);
    }
  }
  if (entries.empty()) throw std::invalid_argument("manifest lists no configs");

  std::filesystem::create_directories(out_dir);
  std::FILE* f = open_csv(out_dir / "matrix.csv");
  std::fprintf(f, "run,status,%s", kMetricsHeader);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    std::string status = "ok";
    ExperimentConfig cfg;
    RunResult res;
    try {
      cfg = load_config(entries[i]);
      finalize_config(cfg);
      char sub[32];
      std::snprintf(sub, sizeof(sub), "run_%03zu", i);
      res = run_experiment(cfg, out_dir / sub);
      if (res.aborted) status = "aborted";
    } catch (const std::exception& err) {
      status = "invalid";
      std::fprintf(stderr, "matrix entry %zu (%s): %s\n", i, entries[i].string().c_str(),
                   err.what());
    }
    std::fprintf(f, "%zu,%s,", i, status.c_str());
    if (status == "ok") {
      char l2[64], r2s[64], secs[64], lam[64];
      std::snprintf(l2, sizeof(l2), "%.17g", res.metrics.rel_l2);
      std::snprintf(r2s, sizeof(r2s), "%.17g", res.metrics.r2);
      std::snprintf(secs, sizeof(secs), "%.17g", res.metrics.train_seconds);
      std::snprintf(lam, sizeof(lam), "%.17g", res.metrics.lambda_f_final);
      write_metrics_row(f, cfg, l2, r2s, secs, lam);
    } else {
      write_metrics_row(f, cfg, "N/A", "N/A", "N/A", "N/A");
    }
  }
  std::fclose(f);
}

void emit_reference(ProblemKind kind, const std::filesystem::path& out_dir,
                    std::uint64_t seed_field) {
  std::filesystem::create_directories(out_dir);
  if (kind == ProblemKind::SinglePhase) {
    const ConductivityField field = build_field(seed_field);
    save_field(field, out_dir / "field.txt");
    save_snapshots(fd_solve(field), out_dir / "snapshots");
  } else {
    const BLSolution sol = welge_shock(FracFlow{});
    const SnapshotStack stack = bl_snapshots(sol);
    std::FILE* f = open_csv(out_dir / "saturation.csv");
    std::fprintf(f, "t,tau,S\n");
    for (int s = 0; s < stack.n_steps(); ++s)
      for (int i = 0; i < stack.n_nodes(); ++i)
        std::fprintf(f, "%.17g,%.17g,%.17g\n", stack.times[s], stack.node_coords.at(i, 0),
                     stack.values[s].data()[i]);
    std::fclose(f);
  }
}

}  // namespace tgnnwf
