#ifndef PROOFRL_INGEST_HPP_
#define PROOFRL_INGEST_HPP_

#include <string>
#include <vector>

#include "proofrl/metrics.hpp"
#include "proofrl/policy.hpp"
#include "proofrl/synth.hpp"
#include "proofrl/trainer.hpp"
#include "proofrl/types.hpp"

namespace proofrl {

// ---------------------------------------------------------------------------
// Proof strings
//
// Grammar:  step (";" step)*
//           step       = id (" & " id)+ " -> " conclusion
//           conclusion = "hypothesis" | "h" | intermediate_id [": " text]
// Whitespace-tolerant. "sentN"/"intN" are accepted as aliases of "xN"/"iN",
// and "hypothesis" may only conclude the final step (it parses as "h").
// ---------------------------------------------------------------------------

// Parses a proof string against a sentence table (fact id -> text). Premise
// ids must be prior conclusions or have sentence entries (UnknownId
// otherwise); malformed text raises ParseError with line/column.
ProofDag parse_proof(const std::string& text, const SentenceMap& sentences);

// Inverse of parse_proof up to whitespace; the root is written as
// "hypothesis" and conclusions with text carry it inline.
std::string serialize_proof(const ProofDag& dag);

// Lowercased alphanumeric tokens, as a set.
IdSet tokenize(const std::string& text);

// ---------------------------------------------------------------------------
// Dataset files (JSON lines)
// ---------------------------------------------------------------------------

struct DatasetRecord {
  std::string id;
  std::string hypothesis_text;
  SentenceMap sentences;
  ProofDag gold;
};

struct LoadResult {
  std::vector<DatasetRecord> records;
  std::vector<std::string> warnings;  // skipped lines, permissive mode only
};

// Each line: {"id", "hypothesis", "sentences": {id: text}, "proof"}. The
// nested EntailmentBank layout ({"meta": {"triples": ...}}) is accepted as
// a fallback when "sentences" is absent. Strict mode aborts on the first
// malformed line; permissive mode skips it with a warning.
LoadResult load_dataset(const std::string& path, bool strict = false);

std::string serialize_record(const DatasetRecord& record);

// ---------------------------------------------------------------------------
// Synthetic task files (JSON lines)
// Each line: {"id", "hypothesis": {"id", "symbols"}, "facts": [...],
//             "gold_steps": ["x1 & x2 -> i1", ...], "mode"}
// ---------------------------------------------------------------------------

void write_tasks(const std::string& path, const std::vector<Task>& tasks);
std::vector<Task> load_tasks(const std::string& path);

// ---------------------------------------------------------------------------
// Reports, checkpoints, training logs
// ---------------------------------------------------------------------------

// Flat JSON object with percentages at one decimal, stable key order.
std::string format_report(const AggregateReport& report);
void write_report(const AggregateReport& report, const std::string& path);
AggregateReport read_report(const std::string& path);

// Versioned textual checkpoint; weights serialized with %.17g so reloads
// are bit-exact.
void write_checkpoint(const std::string& path, const PolicyParams& policy,
                      const CriticParams& critic);
std::pair<PolicyParams, CriticParams> load_checkpoint(const std::string& path);

// One CSV row per epoch; metric cells are empty on epochs without an eval.
std::string format_log(const TrainLog& log);
void write_log(const TrainLog& log, const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace proofrl

#endif  // PROOFRL_INGEST_HPP_
