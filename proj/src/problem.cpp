#include "tgnnwf/problem.hpp"

#include <stdexcept>

namespace tgnnwf {

std::string model_name(Model m) {
  switch (m) {
    case Model::Dnn: return "dnn";
    case Model::Tgnn: return "tgnn";
    case Model::TgnnWf: return "tgnn_wf";
  }
  return "?";
}

Model model_from_name(const std::string& s) {
  if (s == "dnn") return Model::Dnn;
  if (s == "tgnn") return Model::Tgnn;
  if (s == "tgnn_wf") return Model::TgnnWf;
  throw std::invalid_argument("unknown model: " + s);
}

std::string problem_name(ProblemKind p) {
  return p == ProblemKind::SinglePhase ? "singlephase" : "buckley";
}

ProblemKind problem_from_name(const std::string& s) {
  if (s == "singlephase") return ProblemKind::SinglePhase;
  if (s == "buckley") return ProblemKind::Buckley;
  throw std::invalid_argument("unknown problem: " + s);
}

}  // namespace tgnnwf
