#include "proofrl/synth.hpp"

#include <algorithm>
#include <map>

#include "proofrl/errors.hpp"

namespace proofrl {

std::shared_ptr<const SentenceMap> Task::fact_table() const {
  auto table = std::make_shared<SentenceMap>();
  for (const Sentence& fact : facts) (*table)[fact.id] = fact;
  return table;
}

void EnvConfig::validate() const {
  if (n_gold_leaves < 2) throw ConfigInvalid("n_gold_leaves must be >= 2");
  if (n_distractors < 0) throw ConfigInvalid("n_distractors must be >= 0");
  if (max_arity < 2) throw ConfigInvalid("max_arity must be >= 2");
  if (max_steps < 0) throw ConfigInvalid("max_steps must be >= 0");
  if (symbols_per_leaf < 1) throw ConfigInvalid("symbols_per_leaf must be >= 1");
  if (distractor_borrow_prob < 0.0 || distractor_borrow_prob > 1.0) {
    throw ConfigInvalid("distractor_borrow_prob must be in [0, 1]");
  }
}

namespace {

bool premise_tuple_less(const IdSet& a, const IdSet& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                      id_less);
}

}  // namespace

Task generate_task(const EnvConfig& cfg, Rng& rng) {
  cfg.validate();

  // Random tree shape with exactly n_gold_leaves leaves: repeatedly expand
  // a random pending leaf into 2..max_arity children.
  struct Node {
    std::vector<int> children;
    int parent = -1;
  };
  std::vector<Node> nodes(1);
  std::vector<int> pending = {0};
  int leaf_count = 1;
  while (leaf_count < cfg.n_gold_leaves) {
    const std::size_t pick = static_cast<std::size_t>(rng.below(pending.size()));
    const int v = pending[pick];
    pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(pick));
    const int amax =
        std::min(cfg.max_arity, cfg.n_gold_leaves - leaf_count + 1);
    const int arity = 2 + static_cast<int>(rng.below(
                              static_cast<std::uint64_t>(amax - 1)));
    for (int c = 0; c < arity; ++c) {
      nodes.push_back({{}, v});
      nodes[static_cast<std::size_t>(v)].children.push_back(
          static_cast<int>(nodes.size()) - 1);
      pending.push_back(static_cast<int>(nodes.size()) - 1);
    }
    leaf_count += arity - 1;
  }

  int sym_counter = 0;
  auto fresh_symbol = [&] { return "s" + std::to_string(++sym_counter); };

  // Every internal node gets a marker symbol carried by all leaves below
  // it, so sibling groups share more symbols the deeper their meeting
  // point. This is the affinity signal the task difficulty rests on.
  std::map<int, std::string> marker;
  for (std::size_t v = 0; v < nodes.size(); ++v) {
    if (!nodes[v].children.empty()) marker[static_cast<int>(v)] = fresh_symbol();
  }

  std::vector<int> leaf_nodes;
  for (std::size_t v = 0; v < nodes.size(); ++v) {
    if (nodes[v].children.empty()) leaf_nodes.push_back(static_cast<int>(v));
  }

  std::vector<IdSet> leaf_symbols;
  for (const int leaf : leaf_nodes) {
    IdSet syms;
    for (int a = nodes[static_cast<std::size_t>(leaf)].parent; a != -1;
         a = nodes[static_cast<std::size_t>(a)].parent) {
      syms.insert(marker.at(a));
    }
    for (int k = 0; k < cfg.symbols_per_leaf; ++k) syms.insert(fresh_symbol());
    leaf_symbols.push_back(std::move(syms));
  }

  std::vector<IdSet> distractor_symbols;
  for (int d = 0; d < cfg.n_distractors; ++d) {
    IdSet syms;
    for (int k = 0; k < cfg.symbols_per_leaf; ++k) syms.insert(fresh_symbol());
    if (rng.coin(cfg.distractor_borrow_prob)) {
      const IdSet& donor =
          leaf_symbols[static_cast<std::size_t>(rng.below(leaf_symbols.size()))];
      syms.insert(donor.items()[static_cast<std::size_t>(
          rng.below(donor.size()))]);
    }
    distractor_symbols.push_back(std::move(syms));
  }

  // Shuffled fact id assignment, so ids carry no gold/distractor signal.
  const int n_facts = cfg.n_gold_leaves + cfg.n_distractors;
  std::vector<int> id_perm(static_cast<std::size_t>(n_facts));
  for (int k = 0; k < n_facts; ++k) id_perm[static_cast<std::size_t>(k)] = k + 1;
  rng.shuffle(id_perm);

  Task task;
  task.mode = cfg.mode;
  std::map<int, Sentence> materialized;  // tree node -> sentence
  std::vector<Sentence> all_facts;
  for (std::size_t j = 0; j < leaf_nodes.size(); ++j) {
    Sentence fact{fact_id(static_cast<std::size_t>(id_perm[j])),
                  leaf_symbols[j], SentenceKind::Fact, ""};
    materialized[leaf_nodes[j]] = fact;
    all_facts.push_back(std::move(fact));
  }
  for (std::size_t d = 0; d < distractor_symbols.size(); ++d) {
    all_facts.push_back(
        Sentence{fact_id(static_cast<std::size_t>(
                     id_perm[leaf_nodes.size() + d])),
                 distractor_symbols[d], SentenceKind::Fact, ""});
  }
  std::sort(all_facts.begin(), all_facts.end(),
            [](const Sentence& a, const Sentence& b) {
              return id_less(a.id, b.id);
            });
  task.facts = std::move(all_facts);

  // Materialize internal nodes bottom-up in canonical topological order:
  // among ready nodes, the one with the smallest sorted-premise id tuple
  // concludes next. The root concludes last and is named "h".
  std::vector<int> pending_internal;
  for (const auto& [v, m] : marker) pending_internal.push_back(v);
  std::size_t next_intermediate = 1;
  task.gold.mode = cfg.mode;
  while (!pending_internal.empty()) {
    int best = -1;
    IdSet best_premises;
    for (const int v : pending_internal) {
      IdSet premises;
      bool ready = true;
      for (const int c : nodes[static_cast<std::size_t>(v)].children) {
        auto it = materialized.find(c);
        if (it == materialized.end()) {
          ready = false;
          break;
        }
        premises.insert(it->second.id);
      }
      if (!ready) continue;
      if (best == -1 || premise_tuple_less(premises, best_premises)) {
        best = v;
        best_premises = premises;
      }
    }
    IdSet content;
    for (const int c : nodes[static_cast<std::size_t>(best)].children) {
      content = content.set_union(materialized.at(c).symbols);
    }
    const bool is_root = best == 0;
    Sentence conclusion{
        is_root ? "h" : intermediate_id(next_intermediate++), content,
        SentenceKind::Intermediate, ""};
    task.gold.steps.push_back(Step{best_premises, conclusion});
    materialized[best] = std::move(conclusion);
    pending_internal.erase(
        std::find(pending_internal.begin(), pending_internal.end(), best));
  }

  task.gold.root = "h";
  for (std::size_t j = 0; j < leaf_nodes.size(); ++j) {
    task.gold.leaves.insert(fact_id(static_cast<std::size_t>(id_perm[j])));
  }
  task.hypothesis = materialized.at(0);
  return task;
}

Sentence oracle_entail(const std::vector<Sentence>& premises,
                       std::size_t next_index) {
  if (premises.size() < 2) {
    throw TooFewPremises("oracle_entail needs at least 2 premises, got " +
                         std::to_string(premises.size()));
  }
  IdSet symbols;
  for (const Sentence& premise : premises) {
    symbols = symbols.set_union(premise.symbols);
  }
  return Sentence{intermediate_id(next_index), std::move(symbols),
                  SentenceKind::Intermediate, ""};
}

State initial_state(const Task& task) {
  State state;
  state.hypothesis = task.hypothesis;
  for (const Sentence& fact : task.facts) state.candidates.insert(fact.id);
  state.step_index = 1;
  state.facts = task.fact_table();
  return state;
}

State apply_step(const State& state, const Step& step, DagMode mode) {
  for (const std::string& premise : step.premises) {
    if (!state.candidates.contains(premise)) {
      throw IllegalPremise("premise '" + premise + "' is not a candidate");
    }
  }
  State next = state;
  next.steps_so_far.push_back(step);
  next.intermediates.insert(step.conclusion.id);
  if (mode == DagMode::Tree) {
    for (const std::string& premise : step.premises) {
      next.candidates.erase(premise);
      next.used.insert(premise);
    }
  }
  next.candidates.insert(step.conclusion.id);
  next.step_index = state.step_index + 1;
  return next;
}

std::pair<State, std::optional<Sentence>> apply_action(const State& state,
                                                       const Action& action,
                                                       DagMode mode) {
  if (action.is_end) return {state, std::nullopt};
  std::vector<Sentence> premises;
  for (const std::string& id : action.premises) {
    const Sentence* sentence = find_sentence(state, id);
    if (sentence == nullptr || !state.candidates.contains(id)) {
      throw IllegalPremise("premise '" + id + "' is not a candidate");
    }
    premises.push_back(*sentence);
  }
  Sentence conclusion =
      oracle_entail(premises, state.steps_so_far.size() + 1);
  State next = apply_step(state, Step{action.premises, conclusion}, mode);
  return {std::move(next), std::move(conclusion)};
}

bool should_stop(const State& state,
                 const std::optional<Sentence>& last_conclusion,
                 const EnvConfig& cfg) {
  if (last_conclusion &&
      last_conclusion->symbols == state.hypothesis.symbols) {
    return true;
  }
  if (state.step_index > cfg.max_steps) return true;
  if (cfg.mode == DagMode::Tree && state.candidates.size() < 2) return true;
  return false;
}

std::vector<Step> canonical_gold_order(const ProofDag& gold) {
  std::vector<const Step*> remaining;
  for (const Step& step : gold.steps) remaining.push_back(&step);

  std::vector<Step> ordered;
  while (!remaining.empty()) {
    std::size_t best = remaining.size();
    for (std::size_t k = 0; k < remaining.size(); ++k) {
      // Ready iff no premise is still waiting to be concluded.
      const bool ready = std::none_of(
          remaining.begin(), remaining.end(), [&](const Step* s) {
            return remaining[k]->premises.contains(s->conclusion.id);
          });
      if (!ready) continue;
      if (best == remaining.size() ||
          premise_tuple_less(remaining[k]->premises,
                             remaining[best]->premises)) {
        best = k;
      }
    }
    ordered.push_back(*remaining[best]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return ordered;
}

std::vector<std::pair<State, Action>> gold_to_steps(const Task& task) {
  std::vector<std::pair<State, Action>> pairs;
  State state = initial_state(task);
  for (const Step& step : canonical_gold_order(task.gold)) {
    pairs.emplace_back(state, Action::reason(step.premises));
    state = apply_step(state, step, task.mode);
  }
  pairs.emplace_back(state, Action::end());
  return pairs;
}

}  // namespace proofrl
