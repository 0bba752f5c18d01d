#ifndef PROOFRL_RETURNS_HPP_
#define PROOFRL_RETURNS_HPP_

#include <cstddef>
#include <vector>

#include "proofrl/types.hpp"

namespace proofrl {

enum class ReturnMode { Structured, Chained };

struct ReturnConfig {
  double gamma = 0.95;
  ReturnMode mode = ReturnMode::Structured;

  void validate() const;  // throws ConfigInvalid unless 0 < gamma <= 1
};

struct ReturnBatch {
  std::vector<double> td_targets;
  std::vector<double> advantages;
  std::vector<double> values;
};

// States whose values the step at `step_index` bootstraps from, as indices
// into traj.transitions:
//   - a step in the dag: the state(s) in which its conclusion was consumed
//     (several in graph mode);
//   - the dag root: the terminal End transition's state;
//   - a step outside the dag: the chronologically next state.
// The End transition itself has no parents. Requires rewards/in_pred_dag
// flags to be assigned first (RewardsMissing otherwise).
std::vector<std::size_t> parents_of(std::size_t step_index,
                                    const ProofDag& pred,
                                    const Trajectory& traj);

// One-step TD-targets. Structured mode bootstraps the mean value over
// parents_of; Chained mode bootstraps the chronologically next state. The
// terminal End state contributes value 0 regardless of the provided entry,
// and the End transition's own target is its bare reward.
std::vector<double> td_targets(const Trajectory& traj, const ProofDag& pred,
                               const std::vector<double>& values,
                               const ReturnConfig& cfg);

// A_t = G_t - V(s_t), elementwise.
std::vector<double> advantages(const std::vector<double>& td_targets,
                               const std::vector<double>& values);

ReturnBatch make_return_batch(const Trajectory& traj, const ProofDag& pred,
                              const std::vector<double>& values,
                              const ReturnConfig& cfg);

}  // namespace proofrl

#endif  // PROOFRL_RETURNS_HPP_
