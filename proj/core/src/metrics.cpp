#include "proofrl/metrics.hpp"

#include <algorithm>
#include <set>

#include "proofrl/errors.hpp"
#include "proofrl/proof.hpp"
#include "proofrl/synth.hpp"

namespace proofrl {

SimilarFn exact_content_match() {
  return [](const Sentence& a, const Sentence& b) {
    return a.symbols == b.symbols;
  };
}

SimilarFn token_jaccard_at_least(double threshold) {
  return [threshold](const Sentence& a, const Sentence& b) {
    return jaccard(a.symbols, b.symbols) >= threshold;
  };
}

namespace {

DimensionScore from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  DimensionScore score{0.0, false, tp, fp, fn};
  if (tp > 0) {
    const double p = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double r = static_cast<double>(tp) / static_cast<double>(tp + fn);
    score.f1 = 2.0 * p * r / (p + r);
  }
  score.allcorrect = tp > 0 && fp == 0 && fn == 0;
  return score;
}

// Gold conclusion sentence for a gold node id (conclusions only).
const Sentence* gold_conclusion(const ProofDag& gold, const std::string& id) {
  const Step* step = gold.step_concluding(id);
  return step == nullptr ? nullptr : &step->conclusion;
}

}  // namespace

DimensionScore leaves_score(const ProofDag& pred, const ProofDag& gold) {
  const std::size_t tp = pred.leaves.set_intersection(gold.leaves).size();
  return from_counts(tp, pred.leaves.size() - tp, gold.leaves.size() - tp);
}

DimensionScore steps_score(const ProofDag& pred, const ProofDag& gold,
                           const Alignment& alignment) {
  if (alignment.nodes.empty() && !pred.steps.empty()) {
    throw AlignmentMissing("steps_score needs the alignment from align_to_gold");
  }

  std::size_t correct = 0;
  std::set<std::string> matched_gold;
  for (const Step& step : pred.steps) {
    const AlignedNode* aligned = alignment.find(step.conclusion.id);
    if (aligned == nullptr || aligned->is_null()) continue;
    const Step* gold_step = gold.step_concluding(aligned->gold_id);
    if (gold_step == nullptr) continue;

    IdSet mapped;
    bool mappable = true;
    for (const std::string& premise : step.premises) {
      const AlignedNode* premise_aligned = alignment.find(premise);
      if (premise_aligned == nullptr) {
        mapped.insert(premise);  // fact id, kept verbatim
      } else if (premise_aligned->is_null()) {
        mappable = false;
        break;
      } else {
        mapped.insert(premise_aligned->gold_id);
      }
    }
    if (mappable && mapped == gold_step->premises) {
      ++correct;
      matched_gold.insert(aligned->gold_id);
    }
  }

  return from_counts(correct, pred.steps.size() - correct,
                     gold.steps.size() - matched_gold.size());
}

DimensionScore intermediates_score(const ProofDag& pred, const ProofDag& gold,
                                   const Alignment& alignment,
                                   const SimilarFn& similar) {
  if (alignment.nodes.empty() && !pred.steps.empty()) {
    throw AlignmentMissing(
        "intermediates_score needs the alignment from align_to_gold");
  }

  std::size_t correct = 0;
  std::set<std::string> matched_gold;
  for (const Step& step : pred.steps) {
    const AlignedNode* aligned = alignment.find(step.conclusion.id);
    if (aligned == nullptr || aligned->is_null()) continue;
    const Sentence* gold_sentence = gold_conclusion(gold, aligned->gold_id);
    if (gold_sentence == nullptr) continue;
    if (similar(step.conclusion, *gold_sentence)) {
      ++correct;
      matched_gold.insert(aligned->gold_id);
    }
  }

  return from_counts(correct, pred.steps.size() - correct,
                     gold.steps.size() - matched_gold.size());
}

bool overall_allcorrect(const MetricsReport& report) {
  return report.leaves.allcorrect && report.steps.allcorrect &&
         report.intermediates.allcorrect;
}

namespace {

bool match_steps(const std::vector<Step>& gold_order, std::size_t next,
                 const ProofDag& pred, std::vector<bool>& used,
                 std::map<std::string, std::string, IdLess>& pred_to_gold,
                 std::map<std::string, std::string, IdLess>& gold_to_pred,
                 const SimilarFn& similar) {
  if (next == gold_order.size()) return true;
  const Step& g = gold_order[next];
  for (std::size_t s = 0; s < pred.steps.size(); ++s) {
    if (used[s]) continue;
    const Step& p = pred.steps[s];
    const std::string& pid = p.conclusion.id;
    const std::string& gid = g.conclusion.id;
    auto fwd = pred_to_gold.find(pid);
    auto bwd = gold_to_pred.find(gid);
    if (fwd != pred_to_gold.end() && fwd->second != gid) continue;
    if (bwd != gold_to_pred.end() && bwd->second != pid) continue;
    if (!similar(p.conclusion, g.conclusion)) continue;

    // Premises must agree after mapping pred intermediates through the
    // bijection built so far; gold premises are visited children-first, so
    // their counterparts are already fixed.
    IdSet mapped;
    bool ok = true;
    for (const std::string& premise : p.premises) {
      auto it = pred_to_gold.find(premise);
      if (it != pred_to_gold.end()) {
        mapped.insert(it->second);
      } else if (pred.step_concluding(premise) != nullptr) {
        ok = false;  // unmapped pred intermediate cannot match yet
        break;
      } else {
        mapped.insert(premise);
      }
    }
    if (!ok || !(mapped == g.premises)) continue;

    const bool inserted_fwd = fwd == pred_to_gold.end();
    const bool inserted_bwd = bwd == gold_to_pred.end();
    if (inserted_fwd) pred_to_gold[pid] = gid;
    if (inserted_bwd) gold_to_pred[gid] = pid;
    used[s] = true;
    if (match_steps(gold_order, next + 1, pred, used, pred_to_gold,
                    gold_to_pred, similar)) {
      return true;
    }
    used[s] = false;
    if (inserted_fwd) pred_to_gold.erase(pid);
    if (inserted_bwd) gold_to_pred.erase(gid);
  }
  return false;
}

}  // namespace

bool graph_accuracy(const ProofDag& pred, const ProofDag& gold,
                    const SimilarFn& similar) {
  if (pred.steps.size() > 10 || gold.steps.size() > 10) {
    throw GraphTooLarge("graph_accuracy is exhaustive and limited to 10 "
                        "intermediates per side");
  }
  if (pred.steps.size() != gold.steps.size()) return false;
  if (!(pred.leaves == gold.leaves)) return false;

  std::vector<bool> used(pred.steps.size(), false);
  std::map<std::string, std::string, IdLess> pred_to_gold;
  std::map<std::string, std::string, IdLess> gold_to_pred;
  // Designated roots must correspond.
  pred_to_gold[pred.root] = gold.root;
  gold_to_pred[gold.root] = pred.root;
  const std::vector<Step> gold_order = canonical_gold_order(gold);
  return match_steps(gold_order, 0, pred, used, pred_to_gold, gold_to_pred,
                     similar);
}

MetricsReport score_pair(const ProofDag& pred, const ProofDag& gold,
                         const SimilarFn& similar,
                         const std::optional<IdSet>& universe) {
  const Alignment alignment = align_to_gold(pred, gold, universe);
  MetricsReport report;
  report.leaves = leaves_score(pred, gold);
  report.steps = steps_score(pred, gold, alignment);
  report.intermediates = intermediates_score(pred, gold, alignment, similar);
  report.overall_allcorrect = overall_allcorrect(report);
  if (gold.mode == DagMode::Graph || pred.mode == DagMode::Graph) {
    report.graph_accuracy = graph_accuracy(pred, gold, similar);
  }
  return report;
}

AggregateReport aggregate(const std::vector<MetricsReport>& reports) {
  if (reports.empty()) throw EmptyInput("aggregate needs at least one report");
  AggregateReport agg;
  agg.n = reports.size();
  std::size_t n_graph = 0;
  for (const MetricsReport& r : reports) {
    agg.leaves_f1 += r.leaves.f1;
    agg.leaves_ac += r.leaves.allcorrect ? 1.0 : 0.0;
    agg.steps_f1 += r.steps.f1;
    agg.steps_ac += r.steps.allcorrect ? 1.0 : 0.0;
    agg.inter_f1 += r.intermediates.f1;
    agg.inter_ac += r.intermediates.allcorrect ? 1.0 : 0.0;
    agg.overall_ac += r.overall_allcorrect ? 1.0 : 0.0;
    if (r.graph_accuracy) {
      agg.graph_ac += *r.graph_accuracy ? 1.0 : 0.0;
      ++n_graph;
    }
  }
  const double scale = 100.0 / static_cast<double>(reports.size());
  agg.leaves_f1 *= scale;
  agg.leaves_ac *= scale;
  agg.steps_f1 *= scale;
  agg.steps_ac *= scale;
  agg.inter_f1 *= scale;
  agg.inter_ac *= scale;
  agg.overall_ac *= scale;
  agg.graph_ac = n_graph ? agg.graph_ac * 100.0 / static_cast<double>(n_graph)
                         : 0.0;
  return agg;
}

}  // namespace proofrl
