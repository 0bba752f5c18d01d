// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Expected values come from closed-form fixtures or from
// the independent oracles in testutil.hpp.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <unistd.h>
#include <vector>

#include "proofrl/align.hpp"
#include "proofrl/errors.hpp"
#include "proofrl/ingest.hpp"
#include "proofrl/metrics.hpp"
#include "proofrl/policy.hpp"
#include "proofrl/proof.hpp"
#include "proofrl/returns.hpp"
#include "proofrl/trainer.hpp"
#include "testutil.hpp"

using namespace proofrl;
using namespace proofrl::testutil;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

// --------------------------------------------------------------------------
// 1. Reward fixture
// --------------------------------------------------------------------------
Check criterion1() {
  Check c;
  const auto fx = reward_fixture();
  const auto rec = reconstruct_proof(fx.trajectory, DagMode::Tree);
  const Alignment alignment = align_to_gold(rec.dag, fx.task.gold);
  const Trajectory rewarded = assign_rewards(
      fx.trajectory, rec.dag, rec.redundant, alignment, "h", RewardConfig{});

  const std::vector<double> expected = {1.0, -1.0, -0.5, -1.0};
  for (std::size_t t = 0; t < expected.size(); ++t) {
    c.require(rewarded.transitions[t].reward == expected[t],
              "reward " + std::to_string(t + 1) + " = " +
                  std::to_string(rewarded.transitions[t].reward));
  }
  return c;
}

// --------------------------------------------------------------------------
// 2. Chain degeneration
// --------------------------------------------------------------------------
Trajectory make_chain(const Task& task, Rng& rng) {
  std::vector<Step> steps;
  State state = initial_state(task);
  std::string prev;
  const auto facts = state.candidates.items();
  for (std::size_t k = 0; k + 1 < facts.size(); ++k) {
    IdSet premises = k == 0 ? IdSet{facts[0], facts[1]}
                            : IdSet{prev, facts[k + 1]};
    std::vector<Sentence> ps;
    for (const auto& id : premises) ps.push_back(*find_sentence(state, id));
    Sentence concl = oracle_entail(ps, k + 1);
    prev = concl.id;
    const Step s{premises, concl};
    state = apply_step(state, s, DagMode::Tree);
    steps.push_back(s);
  }
  (void)rng;
  return replay_trajectory(task, steps);
}

Check criterion2() {
  Check c;
  Rng rng(202);
  for (int iter = 0; iter < 200; ++iter) {
    EnvConfig env;
    env.n_gold_leaves = 2 + static_cast<int>(rng.below(6));
    env.max_arity = 2;
    Task task = generate_task(env, rng);
    Trajectory traj = make_chain(task, rng);
    const auto rec = reconstruct_proof(traj, DagMode::Tree);
    c.require(rec.redundant.empty(), "chain produced redundant steps");
    for (std::size_t t = 0; t + 1 < traj.size(); ++t) {
      traj.transitions[t].in_pred_dag = true;
    }
    for (auto& tr : traj.transitions) tr.reward = rng.uniform(-1.0, 1.0);
    std::vector<double> values;
    for (std::size_t t = 0; t < traj.size(); ++t) {
      values.push_back(rng.uniform(-1.0, 1.0));
    }

    ReturnConfig cfg;
    cfg.mode = ReturnMode::Structured;
    const auto structured = td_targets(traj, rec.dag, values, cfg);
    cfg.mode = ReturnMode::Chained;
    const auto chained = td_targets(traj, rec.dag, values, cfg);
    for (std::size_t t = 0; t < structured.size(); ++t) {
      c.require(std::abs(structured[t] - chained[t]) <= 1e-12,
                "chain mismatch at t=" + std::to_string(t));
    }
  }
  return c;
}

// --------------------------------------------------------------------------
// 3. Equivalent-trajectory invariance
// --------------------------------------------------------------------------
Check criterion3() {
  Check c;
  Rng rng(303);
  int with_swap = 0;
  int chained_differs = 0;
  for (int iter = 0; iter < 100; ++iter) {
    EnvConfig env;
    env.n_gold_leaves = 3 + static_cast<int>(rng.below(4));
    env.n_distractors = static_cast<int>(rng.below(3));
    Task task = generate_task(env, rng);
    const std::vector<Step> order = canonical_gold_order(task.gold);

    // A valid alternative order: swap an adjacent pair where the later
    // step does not consume the earlier conclusion.
    std::vector<Step> swapped = order;
    bool found = false;
    for (std::size_t j = 0; j + 1 < swapped.size() && !found; ++j) {
      if (!swapped[j + 1].premises.contains(swapped[j].conclusion.id)) {
        std::swap(swapped[j], swapped[j + 1]);
        found = true;
      }
    }

    Trajectory tau = replay_trajectory(task, order);
    const auto rec1 = reconstruct_proof(tau, task.mode);
    const Alignment a1 = align_to_gold(rec1.dag, task.gold);
    tau = assign_rewards(tau, rec1.dag, rec1.redundant, a1, "h",
                         RewardConfig{});

    Rng crng(1000 + iter);
    const CriticParams critic{
        Mlp::random_init(kStateFeatureDim, 32, crng)};
    auto values_of = [&](const Trajectory& traj) {
      std::vector<double> v;
      for (const auto& tr : traj.transitions)
        v.push_back(value(critic, tr.state));
      return v;
    };

    ReturnConfig scfg;
    scfg.mode = ReturnMode::Structured;
    ReturnConfig ccfg;
    ccfg.mode = ReturnMode::Chained;
    const auto s1 = td_targets(tau, rec1.dag, values_of(tau), scfg);
    const auto c1 = td_targets(tau, rec1.dag, values_of(tau), ccfg);

    if (!found) continue;
    ++with_swap;

    Trajectory tau2 = replay_trajectory(task, swapped);
    const auto rec2 = reconstruct_proof(tau2, task.mode);
    const Alignment a2 = align_to_gold(rec2.dag, task.gold);
    tau2 = assign_rewards(tau2, rec2.dag, rec2.redundant, a2, "h",
                          RewardConfig{});
    const auto s2 = td_targets(tau2, rec2.dag, values_of(tau2), scfg);
    const auto c2 = td_targets(tau2, rec2.dag, values_of(tau2), ccfg);

    bool any_chained_diff = false;
    for (std::size_t t1 = 0; t1 + 1 < tau.size(); ++t1) {
      const std::string id = conclusion_of(tau, t1)->id;
      for (std::size_t t2 = 0; t2 + 1 < tau2.size(); ++t2) {
        if (conclusion_of(tau2, t2)->id != id) continue;
        c.require(s1[t1] == s2[t2],
                  "structured return changed for " + id + " in iter " +
                      std::to_string(iter));
        if (c1[t1] != c2[t2]) any_chained_diff = true;
      }
    }
    if (any_chained_diff) ++chained_differs;
  }
  c.require(with_swap > 0, "no instances with independent steps");
  c.require(chained_differs * 10 >= with_swap * 9,
            "chained differed on only " + std::to_string(chained_differs) +
                "/" + std::to_string(with_swap));
  return c;
}

// --------------------------------------------------------------------------
// 4. Gradient oracle
// --------------------------------------------------------------------------
template <typename F>
bool fd_matches(Mlp& target, const Mlp& analytic, F&& eval) {
  constexpr double kEps = 1e-5;
  constexpr double kTol = 1e-4;
  for (std::size_t p = 0; p < target.param_count(); ++p) {
    const double saved = target.get_param(p);
    target.set_param(p, saved + kEps);
    const double hi = eval();
    target.set_param(p, saved - kEps);
    const double lo = eval();
    target.set_param(p, saved);
    const double fd = (hi - lo) / (2.0 * kEps);
    if (std::abs(analytic.get_param(p) - fd) >
        kTol * std::max(1.0, std::abs(fd))) {
      return false;
    }
  }
  return true;
}

Check criterion4() {
  Check c;
  Rng rng(404);
  for (int iter = 0; iter < 100; ++iter) {
    EnvConfig env;
    env.n_gold_leaves = 3;
    env.n_distractors = 2;
    Task task = generate_task(env, rng);
    State state = initial_state(task);
    if (iter % 2) {
      const auto& ids = state.candidates.items();
      state = apply_action(state,
                           Action::reason({ids[0], ids[ids.size() - 1]}),
                           task.mode)
                  .first;
    }
    const auto proposals = propose_actions(state, 2);
    Rng prng(2000 + iter);
    PolicyParams params{Mlp::random_init(kActionFeatureDim, 8, prng)};
    CriticParams critic{Mlp::random_init(kStateFeatureDim, 8, prng)};
    const int k = iter % 3 == 0 ? static_cast<int>(proposals.size()) : 4;

    const auto dist = action_distribution(params, state, proposals, k);
    const Action action =
        dist.proposals[dist.topk[rng.below(dist.topk.size())]];

    const Mlp pg = policy_grad(params, state, action, proposals, k, 1.0);
    c.require(fd_matches(params.scorer, pg,
                         [&] {
                           return logprob(params, state, action, proposals,
                                          k);
                         }),
              "policy gradient mismatch at iter " + std::to_string(iter));

    const Mlp eg = entropy_grad(params, state, proposals, k, 1.0);
    c.require(
        fd_matches(params.scorer, eg,
                   [&] {
                     return action_distribution(params, state, proposals, k)
                         .entropy();
                   }),
        "entropy gradient mismatch at iter " + std::to_string(iter));

    const Mlp vg = value_grad(critic, state, 1.0);
    c.require(fd_matches(critic.value_head, vg,
                         [&] { return value(critic, state); }),
              "value gradient mismatch at iter " + std::to_string(iter));
    if (!c.ok) break;
  }
  return c;
}

// --------------------------------------------------------------------------
// 5. Top-k renormalization
// --------------------------------------------------------------------------
Check criterion5() {
  Check c;
  auto [topk, probs] = renormalize_topk({0.5, 0.3, 0.1, 0.1}, 2);
  c.require(topk == std::vector<std::size_t>{0, 1}, "wrong retained set");
  c.require(std::abs(probs[0] - 0.625) <= 1e-12, "p0 != 0.625");
  c.require(std::abs(probs[1] - 0.375) <= 1e-12, "p1 != 0.375");

  ActionDistribution dist;
  dist.proposals = {Action::reason({"x1", "x2"}), Action::reason({"x1", "x3"}),
                    Action::reason({"x2", "x3"}), Action::end()};
  dist.raw_probs = {0.5, 0.3, 0.1, 0.1};
  dist.topk = topk;
  dist.topk_probs = probs;
  dist.k = 2;

  Rng rng(505);
  int hits = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    if (sample_action(dist, rng) == dist.proposals[0]) ++hits;
  }
  const double freq = static_cast<double>(hits) / n;
  c.require(std::abs(freq - 0.625) <= 0.01,
            "empirical frequency " + std::to_string(freq));
  return c;
}

// --------------------------------------------------------------------------
// 6. Alignment oracle
// --------------------------------------------------------------------------
Check criterion6() {
  Check c;
  Rng rng(606);
  int done = 0;
  while (done < 500) {
    EnvConfig env;
    env.n_gold_leaves = 2 + static_cast<int>(rng.below(4));
    env.n_distractors = static_cast<int>(rng.below(4));
    env.mode = rng.coin() ? DagMode::Graph : DagMode::Tree;
    Task task = generate_task(env, rng);
    Trajectory traj =
        random_trajectory(task, 1 + static_cast<int>(rng.below(5)), rng);
    if (traj.size() < 2) continue;
    const auto rec = reconstruct_proof(traj, task.mode);
    if (rec.dag.steps.size() > 6) continue;
    ++done;

    const Alignment fast = align_to_gold(rec.dag, task.gold);
    const auto brute = brute_align(rec.dag, task.gold);
    c.require(fast.nodes.size() == brute.size(), "alignment size mismatch");
    for (const auto& [id, expected] : brute) {
      const AlignedNode* got = fast.find(id);
      c.require(got != nullptr, "missing node " + id);
      if (got == nullptr) continue;
      c.require(got->gold_id == expected.first,
                "node " + id + " aligned to " + got->gold_id + " vs " +
                    expected.first);
      c.require(std::abs(got->jaccard - expected.second) <= 1e-12,
                "similarity mismatch on " + id);
    }
    if (!c.ok) break;
  }
  return c;
}

// --------------------------------------------------------------------------
// 7. Metric identity + step fixtures
// --------------------------------------------------------------------------
Check criterion7() {
  Check c;
  Rng rng(707);
  for (int iter = 0; iter < 500; ++iter) {
    EnvConfig env;
    env.n_gold_leaves = 2 + static_cast<int>(rng.below(5));
    env.n_distractors = static_cast<int>(rng.below(5));
    env.mode = iter % 2 ? DagMode::Graph : DagMode::Tree;
    const Task task = generate_task(env, rng);
    const MetricsReport report =
        score_pair(task.gold, task.gold, exact_content_match());
    c.require(report.leaves.f1 == 1.0 && report.steps.f1 == 1.0 &&
                  report.intermediates.f1 == 1.0 && report.overall_allcorrect,
              "gold-vs-gold not perfect at iter " + std::to_string(iter));
    if (!c.ok) break;
  }

  SentenceMap sentences;
  for (const std::string id : {"x1", "x2", "x3", "x5", "x23", "x24"}) {
    sentences[id] = Sentence{id, tokenize("fact " + id), SentenceKind::Fact,
                             "fact " + id};
  }
  {
    const ProofDag gold =
        parse_proof("x24 & x5 -> i1: t; i1 & x23 -> hypothesis", sentences);
    const ProofDag pred =
        parse_proof("x23 & x5 -> i1: t; i1 & x24 -> i2: t", sentences);
    const Alignment alignment = align_to_gold(pred, gold);
    c.require(leaves_score(pred, gold).f1 == 1.0, "fixture 1 leaves");
    c.require(!steps_score(pred, gold, alignment).allcorrect,
              "fixture 1 steps should fail");
  }
  {
    const ProofDag gold = parse_proof("x1 & x2 & x3 -> hypothesis", sentences);
    const ProofDag pred =
        parse_proof("x1 & x2 -> i1: t; i1 & x3 -> i2: t", sentences);
    const Alignment alignment = align_to_gold(pred, gold);
    c.require(!steps_score(pred, gold, alignment).allcorrect,
              "fixture 2 steps should fail");
  }
  return c;
}

// --------------------------------------------------------------------------
// 8. Ablation directions on the fixed synthetic benchmark
// --------------------------------------------------------------------------
std::vector<Task> bench_tasks(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Task> tasks;
  for (int i = 0; i < n; ++i) {
    EnvConfig env;
    env.n_gold_leaves = 3 + static_cast<int>(rng.below(2));
    env.n_distractors = 4;
    env.max_arity = 3;
    Task t = generate_task(env, rng);
    t.id = "b" + std::to_string(i);
    tasks.push_back(std::move(t));
  }
  return tasks;
}

TrainConfig bench_cfg(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.hidden_dim = 64;
  cfg.top_k = 4;
  cfg.warmup_epochs = 8;
  cfg.lr_warmup = 1e-2;
  cfg.rl_epochs = 400;
  cfg.lr_policy = 1e-3;
  cfg.lr_critic = 1e-3;
  cfg.seed = seed;
  return cfg;
}

Check criterion8() {
  Check c;
  const std::vector<Task> train_tasks = bench_tasks(1000, 8801);
  const std::vector<Task> holdout = bench_tasks(200, 8802);

  double full = 0.0, warmup_only = 0.0, chained = 0.0, uniform = 0.0;
  const int kSeeds = 5;
  for (int s = 0; s < kSeeds; ++s) {
    {
      TrainConfig cfg = bench_cfg(s);
      const TrainResult r = train(train_tasks, {}, cfg);
      full += evaluate_greedy(holdout, r.policy, cfg).overall_ac;
    }
    {
      TrainConfig cfg = bench_cfg(s);
      cfg.rl_epochs = 0;
      const TrainResult r = train(train_tasks, {}, cfg);
      warmup_only += evaluate_greedy(holdout, r.policy, cfg).overall_ac;
    }
    {
      TrainConfig cfg = bench_cfg(s);
      cfg.returns.mode = ReturnMode::Chained;
      const TrainResult r = train(train_tasks, {}, cfg);
      chained += evaluate_greedy(holdout, r.policy, cfg).overall_ac;
    }
    {
      TrainConfig cfg = bench_cfg(s);
      cfg.rewards.r_redundant = -1.0;
      const TrainResult r = train(train_tasks, {}, cfg);
      uniform += evaluate_greedy(holdout, r.policy, cfg).overall_ac;
    }
  }
  full /= kSeeds;
  warmup_only /= kSeeds;
  chained /= kSeeds;
  uniform /= kSeeds;

  std::printf("    overall_ac means over %d seeds: full=%.1f warmup=%.1f "
              "chained=%.1f uniform_penalty=%.1f\n",
              kSeeds, full, warmup_only, chained, uniform);
  c.require(full >= warmup_only + 5.0, "full did not beat warm-up by 5");
  c.require(full >= chained, "structured below chained");
  c.require(full >= uniform, "fine-grained below uniform penalty");
  return c;
}

// --------------------------------------------------------------------------
// 9. Determinism
// --------------------------------------------------------------------------
Check criterion9() {
  Check c;
  const std::vector<Task> tasks = bench_tasks(40, 9901);
  const std::vector<Task> holdout = bench_tasks(10, 9902);
  TrainConfig cfg = bench_cfg(3);
  cfg.warmup_epochs = 4;
  cfg.rl_epochs = 25;
  cfg.eval_every = 10;

  const TrainResult a = train(tasks, holdout, cfg);
  const TrainResult b = train(tasks, holdout, cfg);

  c.require(format_log(a.log) == format_log(b.log), "CSV logs differ");

  const auto dir = std::filesystem::temp_directory_path();
  const std::string p1 =
      (dir / ("proofrl_acc9a_" + std::to_string(::getpid()))).string();
  const std::string p2 =
      (dir / ("proofrl_acc9b_" + std::to_string(::getpid()))).string();
  write_checkpoint(p1, a.policy, a.critic);
  write_checkpoint(p2, b.policy, b.critic);
  c.require(read_text_file(p1) == read_text_file(p2), "checkpoints differ");
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
  return c;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Check()> fn;
  };
  const std::vector<Criterion> criteria = {
      {"1 reward fixture (1, -1, -0.5, -1)", criterion1},
      {"2 chain degeneration (structured == chained)", criterion2},
      {"3 equivalent-trajectory invariance", criterion3},
      {"4 gradient oracle (finite differences)", criterion4},
      {"5 top-k renormalization + sampling", criterion5},
      {"6 alignment matches brute force", criterion6},
      {"7 metric identity + step fixtures", criterion7},
      {"8 ablation directions", criterion8},
      {"9 determinism", criterion9},
  };

  int failures = 0;
  std::setvbuf(stdout, nullptr, _IOLBF, 0);
  for (const auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Check result;
    try {
      result = criterion.fn();
    } catch (const std::exception& e) {
      result.ok = false;
      result.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("%s criterion %s  (%.1fs)%s%s\n",
                result.ok ? "PASS" : "FAIL", criterion.name, secs,
                result.ok ? "" : " -- ", result.detail.c_str());
    if (!result.ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
