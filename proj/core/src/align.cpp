#include "proofrl/align.hpp"

#include <algorithm>

#include "proofrl/errors.hpp"
#include "proofrl/proof.hpp"

namespace proofrl {

double jaccard(const IdSet& a, const IdSet& b) {
  if (a.empty() && b.empty()) return 0.0;
  const std::size_t inter = a.set_intersection(b).size();
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

Alignment align_to_gold(const ProofDag& pred, const ProofDag& gold,
                        const std::optional<IdSet>& universe) {
  if (universe) {
    for (const std::string& leaf : pred.leaves) {
      if (!universe->contains(leaf)) {
        throw UniverseMismatch("predicted leaf '" + leaf +
                               "' is not in the fact universe");
      }
    }
  }

  struct GoldNode {
    std::string id;
    IdSet leaves;
  };
  std::vector<GoldNode> gold_nodes;
  for (const Step& step : gold.steps) {
    gold_nodes.push_back(
        {step.conclusion.id, subtree_leaves(gold, step.conclusion.id)});
  }

  Alignment alignment;
  for (const Step& step : pred.steps) {
    const IdSet pred_leaves = subtree_leaves(pred, step.conclusion.id);
    AlignedNode best;  // NULL until something beats zero similarity
    std::size_t best_subtree = 0;
    for (const GoldNode& node : gold_nodes) {
      const double js = jaccard(pred_leaves, node.leaves);
      if (js <= 0.0) continue;
      const bool better =
          best.is_null() || js > best.jaccard ||
          (js == best.jaccard && (node.leaves.size() < best_subtree ||
                                  (node.leaves.size() == best_subtree &&
                                   id_less(node.id, best.gold_id))));
      if (better) {
        best = {node.id, js};
        best_subtree = node.leaves.size();
      }
    }
    alignment.nodes[step.conclusion.id] = best;
  }
  return alignment;
}

Trajectory assign_rewards(const Trajectory& traj, const ProofDag& pred,
                          const std::vector<std::size_t>& redundant,
                          const Alignment& alignment,
                          const std::string& gold_root,
                          const RewardConfig& cfg) {
  Trajectory out = traj;

  std::vector<bool> is_redundant(out.transitions.size(), false);
  for (const std::size_t t : redundant) {
    if (t >= out.transitions.size() || out.transitions[t].action.is_end) {
      throw InconsistentInputs("redundant index " + std::to_string(t) +
                               " does not name a Reason transition");
    }
    is_redundant[t] = true;
  }

  for (std::size_t t = 0; t < out.transitions.size(); ++t) {
    Transition& tr = out.transitions[t];
    if (tr.action.is_end) {
      const AlignedNode* root = alignment.find(pred.root);
      const bool correct =
          root != nullptr && root->gold_id == gold_root && root->jaccard == 1.0;
      tr.reward = correct ? cfg.r_end_correct : cfg.r_end_wrong;
      tr.in_pred_dag = false;
      continue;
    }
    const auto conclusion = conclusion_of(out, t);
    if (!conclusion) {
      throw InconsistentInputs("Reason transition " + std::to_string(t) +
                               " has no recorded conclusion");
    }
    if (is_redundant[t]) {
      tr.reward = cfg.r_redundant;
      tr.in_pred_dag = false;
      continue;
    }
    tr.in_pred_dag = true;
    const AlignedNode* aligned = alignment.find(conclusion->id);
    if (aligned == nullptr) {
      throw InconsistentInputs("conclusion '" + conclusion->id +
                               "' is in the dag but missing from the alignment");
    }
    tr.reward =
        (!aligned->is_null() && aligned->jaccard == 1.0) ? cfg.r_correct
                                                         : cfg.r_erroneous;
  }
  return out;
}

}  // namespace proofrl
