#ifndef PROOFRL_SYNTH_HPP_
#define PROOFRL_SYNTH_HPP_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "proofrl/rng.hpp"
#include "proofrl/types.hpp"

namespace proofrl {

// One synthetic reasoning task: prove the hypothesis from the facts. The
// gold proof's conclusions are symbol-set unions of their premises, so the
// oracle entailment module reproduces it exactly.
struct Task {
  std::string id;
  Sentence hypothesis;
  std::vector<Sentence> facts;
  ProofDag gold;
  DagMode mode = DagMode::Tree;

  std::shared_ptr<const SentenceMap> fact_table() const;
};

struct EnvConfig {
  int n_gold_leaves = 3;
  int n_distractors = 0;
  int max_arity = 3;
  int max_steps = 20;
  DagMode mode = DagMode::Tree;
  std::uint64_t seed = 0;

  // Task generation knobs: fresh symbols per gold leaf, and the chance a
  // distractor borrows one symbol from a gold leaf (it always keeps at
  // least one symbol of its own, so no distractor can sit inside a proof
  // of the exact hypothesis).
  int symbols_per_leaf = 2;
  double distractor_borrow_prob = 0.75;

  void validate() const;  // throws ConfigInvalid
};

// Builds a random task: a gold proof over n_gold_leaves facts with step
// arity in [2, max_arity], plus distractors sharing at most half their
// symbols with any gold leaf. Sibling subtrees share ancestor marker
// symbols, so premise affinity is informative but not decisive. Pure
// function of (cfg, rng state).
Task generate_task(const EnvConfig& cfg, Rng& rng);

// Exact entailment oracle: conclusion symbols are the union of premise
// symbols, with a fresh id "i<next_index>". Throws TooFewPremises.
Sentence oracle_entail(const std::vector<Sentence>& premises,
                       std::size_t next_index);

// s1 = {h, no steps, candidates = all facts}.
State initial_state(const Task& task);

// Applies a step with an already-formed conclusion (gold replay, fixture
// construction). Tree mode moves premises to used; graph mode keeps the
// candidate set growing. Throws IllegalPremise.
State apply_step(const State& state, const Step& step, DagMode mode);

// Applies an action. Reason invokes the oracle and returns the conclusion;
// End leaves the state untouched and returns nullopt.
std::pair<State, std::optional<Sentence>> apply_action(const State& state,
                                                       const Action& action,
                                                       DagMode mode);

// Environment-forced stop: the last conclusion matches the hypothesis
// content exactly, the step budget is exhausted, or fewer than two
// candidates remain in tree mode.
bool should_stop(const State& state,
                 const std::optional<Sentence>& last_conclusion,
                 const EnvConfig& cfg);

// Single-step supervised pairs: replays the gold proof in canonical
// topological order (ties by smallest sorted-premise id tuple) and emits
// (state before step, gold Reason action) for each step plus a final
// (state, End) pair.
std::vector<std::pair<State, Action>> gold_to_steps(const Task& task);

// Gold steps in the canonical topological order used by gold_to_steps.
std::vector<Step> canonical_gold_order(const ProofDag& gold);

}  // namespace proofrl

#endif  // PROOFRL_SYNTH_HPP_
