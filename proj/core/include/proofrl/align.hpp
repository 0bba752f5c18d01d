#ifndef PROOFRL_ALIGN_HPP_
#define PROOFRL_ALIGN_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "proofrl/types.hpp"

namespace proofrl {

// Where a predicted intermediate landed: the gold node with the maximum
// Jaccard similarity of subtree leaf sets, or NULL (empty gold_id) when
// every similarity is zero.
struct AlignedNode {
  std::string gold_id;  // empty = NULL
  double jaccard = 0.0;

  bool is_null() const { return gold_id.empty(); }
};

struct Alignment {
  std::map<std::string, AlignedNode, IdLess> nodes;

  const AlignedNode* find(const std::string& pred_id) const {
    auto it = nodes.find(pred_id);
    return it == nodes.end() ? nullptr : &it->second;
  }
};

// Per-step reward values. The uniform-penalty ablation sets r_redundant to
// r_erroneous; nothing here enforces the recommended ordering.
struct RewardConfig {
  double r_correct = 1.0;
  double r_redundant = -0.5;
  double r_erroneous = -1.0;
  double r_end_correct = 1.0;
  double r_end_wrong = -1.0;
};

// |a n b| / |a u b|, defined as 0 when both sets are empty.
double jaccard(const IdSet& a, const IdSet& b);

// Aligns every intermediate of `pred` (conclusions of its steps, root
// included) with the gold node maximizing leaf-set Jaccard similarity.
// Ties break toward the smaller gold subtree, then the smaller id. When a
// fact universe is given, predicted leaves outside it raise
// UniverseMismatch.
Alignment align_to_gold(const ProofDag& pred, const ProofDag& gold,
                        const std::optional<IdSet>& universe = std::nullopt);

// Fills in per-transition rewards: r_correct for steps whose conclusion
// aligns at Jaccard 1, r_redundant for steps outside the dag, r_erroneous
// otherwise. The End transition earns r_end_correct iff the predicted root
// aligns to the gold root at Jaccard 1. Also sets in_pred_dag flags.
// Throws InconsistentInputs when pred/redundant don't match the trajectory.
Trajectory assign_rewards(const Trajectory& traj, const ProofDag& pred,
                          const std::vector<std::size_t>& redundant,
                          const Alignment& alignment,
                          const std::string& gold_root,
                          const RewardConfig& cfg);

}  // namespace proofrl

#endif  // PROOFRL_ALIGN_HPP_
