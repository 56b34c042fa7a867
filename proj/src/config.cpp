#include "tgnnwf/config.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace tgnnwf {

std::string ExperimentConfig::fingerprint() const {
  std::ostringstream os;
  os << problem_name(problem) << "/" << model_name(model) << " data=" << data_per_step
     << " colloc=" << collocation << " region=" << region_rel_size << " quad=" << quad_points
     << " noise=" << noise << " eta=" << eta << " epochs=" << epochs << " lr=" << learning_rate
     << " dual=" << dual_step_size << " seeds=" << seed_field << "," << seed_data << ","
     << seed_sampler << "," << seed_init;
  return os.str();
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string key, eq, value;
    std::istringstream ls(line);
    if (!(ls >> key)) continue;  // blank
    const auto pos = key.find('=');
    if (pos != std::string::npos) {
      value = key.substr(pos + 1);
      key = key.substr(0, pos);
      if (value.empty()) ls >> value;
    } else {
      ls >> eq;
      if (eq == "=") ls >> value;
      else if (!eq.empty() && eq[0] == '=') value = eq.substr(1);
    }
    if (key.empty() || value.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    kv[key] = value;
  }

  auto take = [&](const char* key) -> std::string {
    auto it = kv.find(key);
    if (it == kv.end()) return {};
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto as_int = [](const std::string& s, const char* key) {
    try { return std::stoi(s); } catch (...) {
      throw std::invalid_argument(std::string("config: bad integer for ") + key + ": " + s);
    }
  };
  auto as_double = [](const std::string& s, const char* key) {
    try { return std::stod(s); } catch (...) {
      throw std::invalid_argument(std::string("config: bad number for ") + key + ": " + s);
    }
  };
  auto as_u64 = [](const std::string& s, const char* key) {
    try { return static_cast<std::uint64_t>(std::stoull(s)); } catch (...) {
      throw std::invalid_argument(std::string("config: bad seed for ") + key + ": " + s);
    }
  };

  if (std::string v = take("problem"); !v.empty()) cfg.problem = problem_from_name(v);
  if (std::string v = take("model"); !v.empty()) cfg.model = model_from_name(v);
  if (std::string v = take("data_per_step"); !v.empty()) cfg.data_per_step = as_int(v, "data_per_step");
  if (std::string v = take("collocation"); !v.empty()) cfg.collocation = as_int(v, "collocation");
  if (std::string v = take("region_rel_size"); !v.empty()) cfg.region_rel_size = as_double(v, "region_rel_size");
  if (std::string v = take("quad_points"); !v.empty()) cfg.quad_points = as_int(v, "quad_points");
  if (std::string v = take("noise"); !v.empty()) cfg.noise = as_double(v, "noise");
  if (std::string v = take("eta"); !v.empty()) cfg.eta = as_double(v, "eta");
  if (std::string v = take("epochs"); !v.empty()) cfg.epochs = as_int(v, "epochs");
  if (std::string v = take("learning_rate"); !v.empty()) cfg.learning_rate = as_double(v, "learning_rate");
  if (std::string v = take("dual_step"); !v.empty()) cfg.dual_step_size = as_double(v, "dual_step");
  if (std::string v = take("ic_points"); !v.empty()) cfg.ic_points = as_int(v, "ic_points");
  if (std::string v = take("bc_points"); !v.empty()) cfg.bc_points = as_int(v, "bc_points");
  if (std::string v = take("seed_field"); !v.empty()) cfg.seed_field = as_u64(v, "seed_field");
  if (std::string v = take("seed_data"); !v.empty()) cfg.seed_data = as_u64(v, "seed_data");
  if (std::string v = take("seed_sampler"); !v.empty()) cfg.seed_sampler = as_u64(v, "seed_sampler");
  if (std::string v = take("seed_init"); !v.empty()) cfg.seed_init = as_u64(v, "seed_init");

  if (!kv.empty()) throw std::invalid_argument("config: unknown key '" + kv.begin()->first + "'");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::invalid_argument("cannot open config file " + file.string());
  return parse_config(in);
}

void finalize_config(ExperimentConfig& cfg) {
  const bool sp = cfg.problem == ProblemKind::SinglePhase;
  if (cfg.region_rel_size < 0) cfg.region_rel_size = sp ? 0.2 : 0.008;
  if (cfg.quad_points < 0) cfg.quad_points = sp ? 5 : 10;
  if (cfg.epochs < 0) cfg.epochs = sp ? 1000 : 10000;
  if (cfg.ic_points < 0) cfg.ic_points = sp ? 10000 : 1000;
  if (cfg.bc_points < 0) cfg.bc_points = sp ? 20000 : 1000;

  if (cfg.model == Model::Dnn && cfg.collocation > 0)
    throw std::invalid_argument("config: model=dnn forbids collocation > 0");
  if (cfg.model == Model::Dnn && cfg.data_per_step <= 0)
    throw std::invalid_argument("config: model=dnn requires training data");
  if (cfg.data_per_step < 0 || cfg.collocation < 0)
    throw std::invalid_argument("config: counts must be >= 0");
  if (cfg.noise < 0) throw std::invalid_argument("config: noise must be >= 0");
  if (cfg.eta < 0) throw std::invalid_argument("config: eta must be >= 0");
  if (cfg.eta > 0 && sp) throw std::invalid_argument("config: eta applies to the buckley problem");
  if (cfg.epochs < 0) throw std::invalid_argument("config: epochs must be >= 0");
  if (!(cfg.learning_rate > 0)) throw std::invalid_argument("config: learning_rate must be > 0");
  if (!(cfg.dual_step_size > 0)) throw std::invalid_argument("config: dual_step must be > 0");
  if (cfg.quad_points < 1 || cfg.quad_points > 64)
    throw std::invalid_argument("config: quad_points out of range");
  if (!(cfg.region_rel_size > 0) || cfg.region_rel_size >= 1)
    throw std::invalid_argument("config: region_rel_size must be in (0, 1)");
}

}  // namespace tgnnwf
