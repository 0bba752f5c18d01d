#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "proofrl/errors.hpp"
#include "proofrl/ingest.hpp"
#include "proofrl/trainer.hpp"
#include "testutil.hpp"

using namespace proofrl;
using namespace proofrl::testutil;

namespace {

std::vector<Task> make_tasks(int n, int leaves, int distractors,
                             std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Task> tasks;
  for (int i = 0; i < n; ++i) {
    EnvConfig cfg;
    cfg.n_gold_leaves = leaves;
    cfg.n_distractors = distractors;
    Task t = generate_task(cfg, rng);
    t.id = "t" + std::to_string(i);
    tasks.push_back(std::move(t));
  }
  return tasks;
}

TrainConfig small_cfg() {
  TrainConfig cfg;
  cfg.hidden_dim = 16;
  cfg.warmup_epochs = 8;
  cfg.rl_epochs = 4;
  cfg.seed = 5;
  return cfg;
}

bool same_params(const Mlp& a, const Mlp& b) {
  return a.w1 == b.w1 && a.b1 == b.b1 && a.w2 == b.w2 && a.b2 == b.b2;
}

}  // namespace

TEST_CASE("warmup with zero epochs returns the parameters unchanged") {
  const auto tasks = make_tasks(4, 3, 1, 1);
  TrainConfig cfg = small_cfg();
  cfg.warmup_epochs = 0;
  PolicyParams params = init_policy(cfg);
  const Mlp before = params.scorer;
  Rng rng(0);
  const WarmupResult result = warmup(tasks, std::move(params), cfg, rng);
  CHECK(same_params(result.params.scorer, before));
  CHECK(result.epoch_losses.empty());
}

TEST_CASE("warmup loss is non-increasing within tolerance") {
  const auto tasks = make_tasks(10, 3, 2, 2);
  TrainConfig cfg = small_cfg();
  cfg.warmup_epochs = 15;
  Rng rng(1);
  const WarmupResult result = warmup(tasks, init_policy(cfg), cfg, rng);
  REQUIRE(result.epoch_losses.size() == 15);
  for (std::size_t e = 1; e < result.epoch_losses.size(); ++e) {
    CHECK(result.epoch_losses[e] <= result.epoch_losses[e - 1] * 1.05);
  }
  CHECK(result.epoch_losses.back() < result.epoch_losses.front());
}

TEST_CASE("warmup recovers gold actions on one-step tasks") {
  const auto train_tasks = make_tasks(60, 2, 1, 3);
  const auto holdout = make_tasks(40, 2, 1, 999);
  TrainConfig cfg = small_cfg();
  cfg.warmup_epochs = 40;
  Rng rng(2);
  const WarmupResult result =
      warmup(train_tasks, init_policy(cfg), cfg, rng);

  int correct = 0;
  int total = 0;
  for (const Task& task : holdout) {
    const auto pairs = gold_to_steps(task);
    const auto& [state, gold] = pairs[0];  // the single Reason decision
    const auto proposals = propose_actions(state, cfg.env.max_arity);
    const auto dist = action_distribution(result.params, state, proposals,
                                          static_cast<int>(proposals.size()));
    if (dist.proposals[dist.topk[0]] == gold) ++correct;
    ++total;
  }
  CHECK(static_cast<double>(correct) / total >= 0.95);
}

TEST_CASE("empty warmup dataset is rejected") {
  TrainConfig cfg = small_cfg();
  Rng rng(0);
  CHECK_THROWS_AS(warmup({}, init_policy(cfg), cfg, rng), EmptyDataset);
}

TEST_CASE("rollout basics") {
  const auto tasks = make_tasks(1, 3, 2, 7);
  TrainConfig cfg = small_cfg();
  const PolicyParams params = init_policy(cfg);
  const CriticParams critic = init_critic(cfg, params);

  SUBCASE("fixed seed gives identical trajectories") {
    Rng r1(3), r2(3);
    const auto a = rollout(tasks[0], params, critic, cfg, r1);
    const auto b = rollout(tasks[0], params, critic, cfg, r2);
    REQUIRE(a.trajectory.size() == b.trajectory.size());
    for (std::size_t t = 0; t < a.trajectory.size(); ++t) {
      CHECK(a.trajectory.transitions[t].action ==
            b.trajectory.transitions[t].action);
    }
    CHECK(a.behavior_logprobs == b.behavior_logprobs);
  }
  SUBCASE("max_steps zero forces an immediate stop") {
    TrainConfig tight = cfg;
    tight.env.max_steps = 0;
    Rng rng(4);
    const auto rr = rollout(tasks[0], params, critic, tight, rng);
    REQUIRE(rr.trajectory.size() == 1);
    CHECK(rr.trajectory.transitions[0].action.is_end);
    CHECK(rr.forced[0]);
  }
  SUBCASE("length is bounded and the last transition is done") {
    TrainConfig bounded = cfg;
    bounded.env.max_steps = 3;
    Rng rng(5);
    for (int i = 0; i < 10; ++i) {
      const auto rr = rollout(tasks[0], params, critic, bounded, rng);
      CHECK(rr.trajectory.size() <=
            static_cast<std::size_t>(bounded.env.max_steps) + 1);
      CHECK(rr.trajectory.transitions.back().done);
      CHECK(rr.trajectory.transitions.back().action.is_end);
      for (std::size_t t = 0; t + 1 < rr.trajectory.size(); ++t) {
        CHECK_FALSE(rr.trajectory.transitions[t].done);
      }
    }
  }
}

TEST_CASE("fill_buffer honors capacity and reward classes") {
  const auto tasks = make_tasks(6, 3, 2, 11);
  TrainConfig cfg = small_cfg();
  const PolicyParams params = init_policy(cfg);
  const CriticParams critic = init_critic(cfg, params);
  Rng rng(6);
  const ReplayBuffer buffer = fill_buffer(tasks, params, critic, cfg, rng);

  CHECK(buffer.entries.size() == static_cast<std::size_t>(cfg.buffer_size));
  for (const BufferEntry& entry : buffer.entries) {
    if (entry.action.is_end) {
      CHECK((entry.reward == 1.0 || entry.reward == -1.0));
    } else {
      CHECK((entry.reward == 1.0 || entry.reward == -0.5 ||
             entry.reward == -1.0));
    }
    CHECK(std::isfinite(entry.td_target));
    CHECK(std::isfinite(entry.value));
  }
}

TEST_CASE("behavior logprobs are reproducible from the fill parameters") {
  const auto tasks = make_tasks(6, 3, 2, 13);
  TrainConfig cfg = small_cfg();
  const PolicyParams params = init_policy(cfg);
  const CriticParams critic = init_critic(cfg, params);
  Rng rng(7);
  const ReplayBuffer buffer = fill_buffer(tasks, params, critic, cfg, rng);

  for (const BufferEntry& entry : buffer.entries) {
    if (entry.forced) continue;
    const auto proposals = propose_actions(entry.state, cfg.env.max_arity);
    const double lp =
        logprob(params, entry.state, entry.action, proposals, cfg.top_k);
    CHECK(std::abs(lp - entry.behavior_logprob) < 1e-10);
  }
}

TEST_CASE("clipped surrogate is bounded by both branches") {
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    const double ratio = std::exp(rng.uniform(-1.0, 1.0));
    const double adv = rng.uniform(-2.0, 2.0);
    const double eps = 0.2;
    const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
    const double surrogate = std::min(ratio * adv, clipped * adv);
    CHECK(surrogate <= ratio * adv + 1e-15);
    CHECK(surrogate <= clipped * adv + 1e-15);
  }
}

TEST_CASE("ppo_update improves the critic on a frozen buffer") {
  const auto tasks = make_tasks(8, 3, 2, 17);
  TrainConfig cfg = small_cfg();
  cfg.refresh_targets = false;  // frozen targets make the check clean
  cfg.k_epochs = 4;
  cfg.lr_policy = 0.0;
  PolicyParams params = init_policy(cfg);
  CriticParams critic = init_critic(cfg, params);
  Rng rng(9);
  const ReplayBuffer buffer = fill_buffer(tasks, params, critic, cfg, rng);

  auto critic_loss = [&](const CriticParams& c) {
    double loss = 0.0;
    for (const BufferEntry& e : buffer.entries) {
      const double err = value(c, e.state) - e.td_target;
      loss += err * err;
    }
    return loss / static_cast<double>(buffer.entries.size());
  };

  const double before = critic_loss(critic);
  ppo_update(buffer, params, critic, cfg, rng);
  const double after = critic_loss(critic);
  CHECK(after <= before * 1.01);
}

TEST_CASE("ppo_update on a zero-error buffer has zero critic loss") {
  // Entries whose targets are exactly what the zero critic predicts.
  ReplayBuffer buffer;
  Task task;
  task.facts = {fact("x1", {"a"}), fact("x2", {"b"}), fact("x3", {"c"})};
  task.hypothesis = conclusion("h", {"a", "b", "c"});
  const State s = initial_state(task);
  for (int i = 0; i < 4; ++i) {
    BufferEntry e;
    e.state = s;
    e.action = Action::end();
    e.forced = true;
    e.reward = 0.0;
    e.td_target = 0.0;
    e.value = 0.0;
    e.parent_count = 0;
    buffer.entries.push_back(e);
  }
  TrainConfig cfg = small_cfg();
  cfg.minibatch = 2;
  PolicyParams params = init_policy(cfg);
  CriticParams critic{Mlp::zeros(kStateFeatureDim, cfg.hidden_dim)};
  Rng rng(10);
  const UpdateStats stats = ppo_update(buffer, params, critic, cfg, rng);
  CHECK(stats.critic_loss == 0.0);
}

TEST_CASE("ppo_update rejects an empty buffer") {
  TrainConfig cfg = small_cfg();
  PolicyParams params = init_policy(cfg);
  CriticParams critic = init_critic(cfg, params);
  Rng rng(11);
  CHECK_THROWS_AS(ppo_update(ReplayBuffer{}, params, critic, cfg, rng),
                  EmptyBuffer);
}

TEST_CASE("train with zero RL epochs equals warm-up exactly") {
  const auto tasks = make_tasks(6, 3, 1, 19);
  TrainConfig cfg = small_cfg();
  cfg.rl_epochs = 0;

  const TrainResult via_train = train(tasks, {}, cfg);

  Rng wrng = Rng::substream(cfg.seed, 1);
  const WarmupResult direct = warmup(tasks, init_policy(cfg), cfg, wrng);
  CHECK(same_params(via_train.policy.scorer, direct.params.scorer));
  CHECK(via_train.log.rows.empty());
}

TEST_CASE("training runs are bitwise reproducible") {
  const auto tasks = make_tasks(8, 3, 2, 23);
  const auto holdout = make_tasks(4, 3, 2, 29);
  TrainConfig cfg = small_cfg();
  cfg.eval_every = 2;

  const TrainResult a = train(tasks, holdout, cfg);
  const TrainResult b = train(tasks, holdout, cfg);

  CHECK(same_params(a.policy.scorer, b.policy.scorer));
  CHECK(same_params(a.critic.value_head, b.critic.value_head));
  CHECK(format_log(a.log) == format_log(b.log));
  REQUIRE(a.log.rows.size() == b.log.rows.size());
  for (std::size_t i = 0; i < a.log.rows.size(); ++i) {
    CHECK(a.log.rows[i].policy_loss == b.log.rows[i].policy_loss);
    CHECK(a.log.rows[i].critic_loss == b.log.rows[i].critic_loss);
  }
}

TEST_CASE("evaluate_greedy scores a gold-imitating policy highly") {
  // A policy trained long enough on two-leaf tasks reconstructs them.
  const auto train_tasks = make_tasks(40, 2, 0, 31);
  const auto holdout = make_tasks(20, 2, 0, 37);
  TrainConfig cfg = small_cfg();
  cfg.warmup_epochs = 30;
  cfg.rl_epochs = 0;
  const TrainResult result = train(train_tasks, {}, cfg);
  const AggregateReport agg = evaluate_greedy(holdout, result.policy, cfg);
  CHECK(agg.overall_ac >= 95.0);
}

TEST_CASE("config validation") {
  TrainConfig cfg;
  cfg.buffer_size = 2;
  cfg.minibatch = 3;
  CHECK_THROWS_AS(cfg.validate(), ConfigInvalid);
  cfg = TrainConfig{};
  cfg.clip_eps = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigInvalid);
}
