#ifndef PROOFRL_METRICS_HPP_
#define PROOFRL_METRICS_HPP_

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "proofrl/align.hpp"
#include "proofrl/types.hpp"

namespace proofrl {

// Conclusion similarity predicate. Exact symbol-set equality in synthetic
// mode; token-Jaccard with a threshold is the usual ingest-mode choice.
using SimilarFn = std::function<bool(const Sentence&, const Sentence&)>;

SimilarFn exact_content_match();
SimilarFn token_jaccard_at_least(double threshold);

struct DimensionScore {
  double f1 = 0.0;
  bool allcorrect = false;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

struct MetricsReport {
  DimensionScore leaves;
  DimensionScore steps;
  DimensionScore intermediates;
  bool overall_allcorrect = false;
  std::optional<bool> graph_accuracy;  // graph mode only
};

// F1 between predicted and gold leaf fact id sets.
DimensionScore leaves_score(const ProofDag& pred, const ProofDag& gold);

// A predicted step is correct iff, after mapping its intermediate premise
// ids through the alignment, its premise set exactly equals the premises of
// the gold step concluding the aligned node. NULL-aligned steps count as
// false positives.
DimensionScore steps_score(const ProofDag& pred, const ProofDag& gold,
                           const Alignment& alignment);

// A predicted intermediate is correct iff aligned non-NULL and its content
// is similar to the aligned gold conclusion.
DimensionScore intermediates_score(const ProofDag& pred, const ProofDag& gold,
                                   const Alignment& alignment,
                                   const SimilarFn& similar);

bool overall_allcorrect(const MetricsReport& report);

// Exact labeled-dag isomorphism check: same leaves, same step premise
// structure under some intermediate bijection (root mapped to root), and
// pairwise-similar conclusions. Exhaustive, so graphs with more than 10
// intermediates per side raise GraphTooLarge.
bool graph_accuracy(const ProofDag& pred, const ProofDag& gold,
                    const SimilarFn& similar);

// All dimensions at once; computes the alignment internally and, in graph
// mode, the graph accuracy flag.
MetricsReport score_pair(const ProofDag& pred, const ProofDag& gold,
                         const SimilarFn& similar,
                         const std::optional<IdSet>& universe = std::nullopt);

// Dataset-level arithmetic means, as percentages.
struct AggregateReport {
  std::size_t n = 0;
  double leaves_f1 = 0.0;
  double leaves_ac = 0.0;
  double steps_f1 = 0.0;
  double steps_ac = 0.0;
  double inter_f1 = 0.0;
  double inter_ac = 0.0;
  double overall_ac = 0.0;
  double graph_ac = 0.0;
};

AggregateReport aggregate(const std::vector<MetricsReport>& reports);

}  // namespace proofrl

#endif  // PROOFRL_METRICS_HPP_
