#ifndef PROOFRL_PROOF_HPP_
#define PROOFRL_PROOF_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "proofrl/types.hpp"

namespace proofrl {

struct ReconstructResult {
  ProofDag dag;
  // Indices into trajectory.transitions of Reason steps that did not make it
  // into the dag (their conclusion is unreachable from the root).
  std::vector<std::size_t> redundant;
};

// Rebuilds the predicted proof from a trajectory: the last Reason step's
// conclusion becomes the root, and steps are kept iff they are reachable by
// backtracking from the root through premise links (all premise links are
// followed, so graph-mode multi-parent conclusions work unchanged). Every
// Reason step is either in the dag or reported redundant, never both.
// Throws EmptyTrajectory when the trajectory holds no Reason step.
ReconstructResult reconstruct_proof(const Trajectory& trajectory,
                                    DagMode mode = DagMode::Tree);

// Fact ids reachable downward from `node`; a leaf fact yields {itself}.
// Throws UnknownNode when `node` is neither a conclusion nor a leaf.
IdSet subtree_leaves(const ProofDag& dag, const std::string& node);

// Deterministic serialization of a state: steps sorted by conclusion id,
// id sets in canonical order. Two states serialize identically iff their
// component sets are equal, regardless of insertion order.
std::string canonical_state_text(const State& state);

// Structural checks: ids resolve, no cycles, tree-mode single-consumer rule.
// Violations are returned as data, an empty list means the dag is valid.
std::vector<std::string> validate_dag(const ProofDag& dag);

}  // namespace proofrl

#endif  // PROOFRL_PROOF_HPP_
