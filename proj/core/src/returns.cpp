#include "proofrl/returns.hpp"

#include <string>

#include "proofrl/errors.hpp"

namespace proofrl {

void ReturnConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw ConfigInvalid("gamma must be in (0, 1]");
  }
}

std::vector<std::size_t> parents_of(std::size_t step_index,
                                    const ProofDag& pred,
                                    const Trajectory& traj) {
  const auto& transitions = traj.transitions;
  if (step_index >= transitions.size() ||
      transitions[step_index].action.is_end) {
    return {};
  }
  const auto conclusion = conclusion_of(traj, step_index);
  if (!conclusion) {
    throw RewardsMissing("transition " + std::to_string(step_index) +
                         " has no conclusion; malformed trajectory");
  }

  const bool in_dag = pred.step_concluding(conclusion->id) != nullptr;
  if (in_dag && !transitions[step_index].in_pred_dag) {
    throw RewardsMissing(
        "in_pred_dag flags not set; run assign_rewards before parents_of");
  }

  if (!in_dag) {
    // Fallback for steps outside the dag: the chronologically next state.
    return {step_index + 1};
  }
  if (conclusion->id == pred.root) {
    // The root's conclusion is consumed by ending the episode.
    return {transitions.size() - 1};
  }
  std::vector<std::size_t> parents;
  for (std::size_t j = step_index + 1; j < transitions.size(); ++j) {
    if (transitions[j].action.is_end || !transitions[j].in_pred_dag) continue;
    if (transitions[j].action.premises.contains(conclusion->id)) {
      parents.push_back(j);
    }
  }
  if (parents.empty()) {
    throw RewardsMissing("conclusion '" + conclusion->id +
                         "' is in the dag but never consumed; "
                         "pred/trajectory mismatch");
  }
  return parents;
}

std::vector<double> td_targets(const Trajectory& traj, const ProofDag& pred,
                               const std::vector<double>& values,
                               const ReturnConfig& cfg) {
  cfg.validate();
  const auto& transitions = traj.transitions;
  if (values.size() != transitions.size()) {
    throw LengthMismatch("need one value per transition: " +
                         std::to_string(values.size()) + " values for " +
                         std::to_string(transitions.size()) + " transitions");
  }

  const std::size_t last = transitions.size() - 1;
  auto bootstrap = [&](std::size_t j) {
    return j >= last ? 0.0 : values[j];  // terminal state value is 0
  };

  std::vector<double> targets(transitions.size());
  for (std::size_t t = 0; t < transitions.size(); ++t) {
    const double r = transitions[t].reward;
    if (transitions[t].action.is_end) {
      targets[t] = r;
      continue;
    }
    if (cfg.mode == ReturnMode::Chained) {
      targets[t] = r + cfg.gamma * bootstrap(t + 1);
      continue;
    }
    const auto parents = parents_of(t, pred, traj);
    double sum = 0.0;
    for (const std::size_t p : parents) sum += bootstrap(p);
    targets[t] = r + cfg.gamma * sum / static_cast<double>(parents.size());
  }
  return targets;
}

std::vector<double> advantages(const std::vector<double>& td_targets,
                               const std::vector<double>& values) {
  if (td_targets.size() != values.size()) {
    throw LengthMismatch("td_targets and values differ in length");
  }
  std::vector<double> out(td_targets.size());
  for (std::size_t t = 0; t < out.size(); ++t) {
    out[t] = td_targets[t] - values[t];
  }
  return out;
}

ReturnBatch make_return_batch(const Trajectory& traj, const ProofDag& pred,
                              const std::vector<double>& values,
                              const ReturnConfig& cfg) {
  ReturnBatch batch;
  batch.values = values;
  batch.td_targets = td_targets(traj, pred, values, cfg);
  batch.advantages = advantages(batch.td_targets, batch.values);
  return batch;
}

}  // namespace proofrl
