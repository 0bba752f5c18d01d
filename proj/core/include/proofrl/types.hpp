#ifndef PROOFRL_TYPES_HPP_
#define PROOFRL_TYPES_HPP_

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "proofrl/ids.hpp"

namespace proofrl {

enum class SentenceKind { Fact, Intermediate };

// A fact or an intermediate conclusion. Content is a sorted set of primitive
// symbols; in ingest mode the raw text is kept alongside its token set.
struct Sentence {
  std::string id;
  IdSet symbols;
  SentenceKind kind = SentenceKind::Fact;
  std::string text;  // raw text, ingest mode only

  // Exact string equality on the key doubles as semantic equality.
  std::string content_key() const { return symbols.joined(","); }

  bool operator==(const Sentence& other) const = default;
};

// One entailment step: <premises> -> conclusion.
struct Step {
  IdSet premises;
  Sentence conclusion;

  bool operator==(const Step& other) const = default;
};

// Reason over a premise set, or End the episode.
struct Action {
  static Action reason(IdSet premises) {
    return Action{false, std::move(premises)};
  }
  static Action end() { return Action{true, {}}; }

  bool is_end = false;
  IdSet premises;

  bool operator==(const Action& other) const = default;
};

using SentenceMap = std::map<std::string, Sentence, IdLess>;

// Decision state at reasoning step t: the hypothesis, the steps taken so
// far, and the id sets tracking candidates / used premises / intermediates.
// Immutable after construction; `facts` is the episode's fact table, shared
// read-only across all states of the episode so featurizers can resolve
// candidate ids to contents.
struct State {
  Sentence hypothesis;
  std::vector<Step> steps_so_far;
  IdSet candidates;
  IdSet used;
  IdSet intermediates;
  int step_index = 1;
  std::shared_ptr<const SentenceMap> facts;

  // Logical equality; the shared fact table is derived context, not state.
  bool same_state(const State& other) const {
    return hypothesis == other.hypothesis &&
           steps_so_far == other.steps_so_far &&
           candidates == other.candidates && used == other.used &&
           intermediates == other.intermediates &&
           step_index == other.step_index;
  }
};

// Resolves an id against the state's fact table, then against conclusions
// of steps taken so far. Returns nullptr when unknown.
const Sentence* find_sentence(const State& state, const std::string& id);

enum class DagMode { Tree, Graph };

// The structured explanation: steps, a designated root conclusion and the
// fact leaves. In Tree mode every non-root conclusion feeds exactly one
// later step; Graph mode allows multiple consumers.
struct ProofDag {
  std::vector<Step> steps;
  std::string root;
  IdSet leaves;
  DagMode mode = DagMode::Tree;

  const Step* step_concluding(const std::string& id) const;
};

struct Transition {
  State state;
  Action action;
  double reward = 0.0;
  bool in_pred_dag = false;
  bool done = false;
};

// One rollout. Exactly the last transition has done = true and carries the
// End action (sampled or forced by a stopping rule). The conclusion of the
// Reason transition at index t lives in transitions[t+1].state.
struct Trajectory {
  std::vector<Transition> transitions;

  std::size_t size() const { return transitions.size(); }
  bool empty() const { return transitions.empty(); }
};

// Conclusion produced by the Reason transition at `index`, read from the
// successor state. Returns nullopt for End transitions.
std::optional<Sentence> conclusion_of(const Trajectory& traj,
                                      std::size_t index);

std::string to_string(DagMode mode);
DagMode dag_mode_from_string(const std::string& s);

}  // namespace proofrl

#endif  // PROOFRL_TYPES_HPP_
