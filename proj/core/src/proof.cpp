#include "proofrl/proof.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "proofrl/errors.hpp"

namespace proofrl {

ReconstructResult reconstruct_proof(const Trajectory& trajectory,
                                    DagMode mode) {
  struct ReasonStep {
    std::size_t index;  // transition index
    Step step;
  };
  std::vector<ReasonStep> steps;
  for (std::size_t t = 0; t < trajectory.transitions.size(); ++t) {
    if (trajectory.transitions[t].action.is_end) continue;
    auto conclusion = conclusion_of(trajectory, t);
    if (!conclusion) continue;
    steps.push_back(
        {t, Step{trajectory.transitions[t].action.premises, *conclusion}});
  }
  if (steps.empty()) {
    throw EmptyTrajectory("trajectory contains no Reason step");
  }

  // Conclusion ids are fresh per step, so this map is injective.
  std::map<std::string, std::size_t, IdLess> producer;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    producer[steps[k].step.conclusion.id] = k;
  }

  std::vector<bool> included(steps.size(), false);
  std::vector<std::size_t> stack = {steps.size() - 1};
  included.back() = true;
  while (!stack.empty()) {
    const std::size_t k = stack.back();
    stack.pop_back();
    for (const std::string& premise : steps[k].step.premises) {
      auto it = producer.find(premise);
      if (it != producer.end() && !included[it->second]) {
        included[it->second] = true;
        stack.push_back(it->second);
      }
    }
  }

  ReconstructResult result;
  result.dag.mode = mode;
  result.dag.root = steps.back().step.conclusion.id;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    if (!included[k]) {
      result.redundant.push_back(steps[k].index);
      continue;
    }
    result.dag.steps.push_back(steps[k].step);
    for (const std::string& premise : steps[k].step.premises) {
      if (!producer.count(premise)) result.dag.leaves.insert(premise);
    }
  }
  return result;
}

IdSet subtree_leaves(const ProofDag& dag, const std::string& node) {
  std::map<std::string, const Step*, IdLess> producer;
  for (const Step& step : dag.steps) producer[step.conclusion.id] = &step;

  if (!producer.count(node) && !dag.leaves.contains(node)) {
    throw UnknownNode("node '" + node + "' is not in the dag");
  }

  IdSet leaves;
  std::vector<std::string> stack = {node};
  std::set<std::string> seen;
  while (!stack.empty()) {
    const std::string id = stack.back();
    stack.pop_back();
    if (!seen.insert(id).second) continue;
    auto it = producer.find(id);
    if (it == producer.end()) {
      leaves.insert(id);
      continue;
    }
    for (const std::string& premise : it->second->premises) {
      stack.push_back(premise);
    }
  }
  return leaves;
}

std::string canonical_state_text(const State& state) {
  std::vector<const Step*> steps;
  steps.reserve(state.steps_so_far.size());
  for (const Step& step : state.steps_so_far) steps.push_back(&step);
  std::sort(steps.begin(), steps.end(), [](const Step* a, const Step* b) {
    return id_less(a->conclusion.id, b->conclusion.id);
  });

  std::string out = "h:" + state.hypothesis.id + "=" +
                    state.hypothesis.content_key() + "|t:" +
                    std::to_string(state.step_index) + "|P:";
  for (const Step* step : steps) {
    out += "(" + step->premises.joined("&") + ">" + step->conclusion.id +
           "=" + step->conclusion.content_key() + ")";
  }
  out += "|C:" + state.candidates.joined();
  out += "|U:" + state.used.joined();
  out += "|I:" + state.intermediates.joined();
  return out;
}

std::vector<std::string> validate_dag(const ProofDag& dag) {
  std::vector<std::string> violations;

  std::map<std::string, std::size_t, IdLess> producer;
  for (std::size_t k = 0; k < dag.steps.size(); ++k) {
    const std::string& id = dag.steps[k].conclusion.id;
    if (producer.count(id)) {
      violations.push_back("duplicate conclusion id '" + id + "'");
    }
    producer[id] = k;
  }
  if (!producer.count(dag.root)) {
    violations.push_back("root '" + dag.root + "' has no producing step");
  }

  for (const Step& step : dag.steps) {
    if (step.premises.contains(step.conclusion.id)) {
      violations.push_back("step concluding '" + step.conclusion.id +
                           "' lists its own conclusion as a premise");
    }
    for (const std::string& premise : step.premises) {
      if (!producer.count(premise) && !dag.leaves.contains(premise)) {
        violations.push_back("premise '" + premise +
                             "' resolves to neither a step nor a leaf");
      }
    }
  }

  // Cycle check by iterative DFS over premise links.
  static const IdSet kNoPremises;
  std::map<std::string, int, IdLess> color;  // 0 white, 1 gray, 2 black
  for (const auto& [id, k] : producer) {
    if (color[id] != 0) continue;
    std::vector<std::pair<std::string, std::size_t>> stack{{id, 0}};
    color[id] = 1;
    while (!stack.empty()) {
      auto& [node, edge] = stack.back();
      auto it = producer.find(node);
      const IdSet& premises =
          it != producer.end() ? dag.steps[it->second].premises : kNoPremises;
      if (edge < premises.size()) {
        const std::string& next = premises.items()[edge++];
        if (!producer.count(next)) continue;
        if (color[next] == 1) {
          violations.push_back("cycle through '" + next + "'");
          continue;
        }
        if (color[next] == 0) {
          color[next] = 1;
          stack.push_back({next, 0});
        }
      } else {
        color[node] = 2;
        stack.pop_back();
      }
    }
  }

  if (dag.mode == DagMode::Tree) {
    std::map<std::string, int, IdLess> consumers;
    for (const Step& step : dag.steps) {
      for (const std::string& premise : step.premises) {
        if (producer.count(premise)) consumers[premise] += 1;
      }
    }
    for (const auto& [id, k] : producer) {
      const int n = consumers.count(id) ? consumers.at(id) : 0;
      if (id == dag.root) {
        if (n != 0) {
          violations.push_back("root '" + id + "' is consumed by a step");
        }
      } else if (n != 1) {
        violations.push_back("tree-mode conclusion '" + id + "' has " +
                             std::to_string(n) + " consumers, expected 1");
      }
    }
  }

  return violations;
}

}  // namespace proofrl
