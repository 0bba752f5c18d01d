#include <benchmark/benchmark.h>

#include "proofrl/align.hpp"
#include "proofrl/proof.hpp"
#include "proofrl/returns.hpp"
#include "proofrl/trainer.hpp"

using namespace proofrl;

namespace {

Task bench_task(int leaves, int distractors, std::uint64_t seed) {
  EnvConfig cfg;
  cfg.n_gold_leaves = leaves;
  cfg.n_distractors = distractors;
  Rng rng(seed);
  return generate_task(cfg, rng);
}

TrainConfig bench_cfg() {
  TrainConfig cfg;
  cfg.hidden_dim = 64;
  cfg.seed = 1;
  return cfg;
}

}  // namespace

static void BM_generate_task(benchmark::State& state) {
  EnvConfig cfg;
  cfg.n_gold_leaves = static_cast<int>(state.range(0));
  cfg.n_distractors = 4;
  Rng rng(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_task(cfg, rng));
  }
}
BENCHMARK(BM_generate_task)->Arg(3)->Arg(6);

static void BM_rollout(benchmark::State& state) {
  const Task task = bench_task(4, static_cast<int>(state.range(0)), 2);
  const TrainConfig cfg = bench_cfg();
  const PolicyParams params = init_policy(cfg);
  const CriticParams critic = init_critic(cfg, params);
  Rng rng(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rollout(task, params, critic, cfg, rng));
  }
}
BENCHMARK(BM_rollout)->Arg(2)->Arg(6);

static void BM_align_to_gold(benchmark::State& state) {
  const Task task = bench_task(static_cast<int>(state.range(0)), 4, 4);
  const Trajectory traj = [&] {
    Trajectory t;
    State s = initial_state(task);
    for (const Step& step : canonical_gold_order(task.gold)) {
      t.transitions.push_back({s, Action::reason(step.premises), 0.0, false,
                               false});
      s = apply_step(s, step, task.mode);
    }
    t.transitions.push_back({s, Action::end(), 0.0, false, true});
    return t;
  }();
  const auto rec = reconstruct_proof(traj, task.mode);
  for (auto _ : state) {
    benchmark::DoNotOptimize(align_to_gold(rec.dag, task.gold));
  }
}
BENCHMARK(BM_align_to_gold)->Arg(4)->Arg(7);

static void BM_td_targets_structured(benchmark::State& state) {
  const Task task = bench_task(6, 2, 5);
  Trajectory traj;
  State s = initial_state(task);
  for (const Step& step : canonical_gold_order(task.gold)) {
    traj.transitions.push_back({s, Action::reason(step.premises), 0.5, true,
                                false});
    s = apply_step(s, step, task.mode);
  }
  traj.transitions.push_back({s, Action::end(), 1.0, false, true});
  const auto rec = reconstruct_proof(traj, task.mode);
  const std::vector<double> values(traj.size(), 0.25);
  ReturnConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(td_targets(traj, rec.dag, values, cfg));
  }
}
BENCHMARK(BM_td_targets_structured);

static void BM_ppo_update(benchmark::State& state) {
  Rng task_rng(6);
  std::vector<Task> tasks;
  for (int i = 0; i < 8; ++i) {
    EnvConfig env;
    env.n_gold_leaves = 3;
    env.n_distractors = 4;
    tasks.push_back(generate_task(env, task_rng));
  }
  const TrainConfig cfg = bench_cfg();
  PolicyParams params = init_policy(cfg);
  CriticParams critic = init_critic(cfg, params);
  Rng rng(7);
  const ReplayBuffer buffer = fill_buffer(tasks, params, critic, cfg, rng);
  for (auto _ : state) {
    PolicyParams p = params;
    CriticParams v = critic;
    benchmark::DoNotOptimize(ppo_update(buffer, p, v, cfg, rng));
  }
}
BENCHMARK(BM_ppo_update);

BENCHMARK_MAIN();
