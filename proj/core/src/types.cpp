#include "proofrl/types.hpp"

#include "proofrl/errors.hpp"

namespace proofrl {

const Sentence* find_sentence(const State& state, const std::string& id) {
  if (state.facts) {
    auto it = state.facts->find(id);
    if (it != state.facts->end()) return &it->second;
  }
  for (const Step& step : state.steps_so_far) {
    if (step.conclusion.id == id) return &step.conclusion;
  }
  if (state.hypothesis.id == id) return &state.hypothesis;
  return nullptr;
}

const Step* ProofDag::step_concluding(const std::string& id) const {
  for (const Step& step : steps) {
    if (step.conclusion.id == id) return &step;
  }
  return nullptr;
}

std::optional<Sentence> conclusion_of(const Trajectory& traj,
                                      std::size_t index) {
  if (index + 1 >= traj.transitions.size()) return std::nullopt;
  if (traj.transitions[index].action.is_end) return std::nullopt;
  // Well-formed trajectories end with an End transition, so every Reason
  // transition has a successor state holding its conclusion.
  const State& next = traj.transitions[index + 1].state;
  if (next.steps_so_far.empty()) return std::nullopt;
  return next.steps_so_far.back().conclusion;
}

std::string to_string(DagMode mode) {
  return mode == DagMode::Tree ? "tree" : "graph";
}

DagMode dag_mode_from_string(const std::string& s) {
  if (s == "tree") return DagMode::Tree;
  if (s == "graph") return DagMode::Graph;
  throw ConfigInvalid("unknown mode '" + s + "' (expected tree|graph)");
}

}  // namespace proofrl
