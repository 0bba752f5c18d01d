#ifndef PROOFRL_TRAINER_HPP_
#define PROOFRL_TRAINER_HPP_

#include <cstddef>
#include <optional>
#include <vector>

#include "proofrl/align.hpp"
#include "proofrl/metrics.hpp"
#include "proofrl/policy.hpp"
#include "proofrl/returns.hpp"
#include "proofrl/synth.hpp"

namespace proofrl {

struct TrainConfig {
  EnvConfig env;  // rollout limits; per-task mode wins over env.mode

  int hidden_dim = 64;
  int top_k = 4;

  int warmup_epochs = 20;
  int warmup_batch = 16;
  double lr_warmup = 1e-2;

  int rl_epochs = 150;
  int buffer_size = 12;
  int minibatch = 3;
  int k_epochs = 2;
  double clip_eps = 0.2;
  double entropy_beta = 1e-4;
  double lr_policy = 1e-3;
  double lr_critic = 1e-3;

  ReturnConfig returns;
  RewardConfig rewards;

  // TD-targets are recomputed with the current critic at the start of each
  // buffer epoch; switch off to freeze them at fill time.
  bool refresh_targets = true;
  bool normalize_advantages = false;
  bool critic_from_warmup = false;

  int eval_every = 0;  // 0 = evaluate only after the last epoch
  std::uint64_t seed = 0;

  void validate() const;
};

// One transition as stored in the replay buffer. Parent states are kept by
// value so targets can be recomputed after truncation; terminal parents
// (value 0) are folded into parent_count.
struct BufferEntry {
  State state;
  Action action;
  double reward = 0.0;
  double behavior_logprob = 0.0;
  bool forced = false;  // env-forced End: no policy gradient through it
  double td_target = 0.0;
  double value = 0.0;
  bool in_pred_dag = false;
  std::vector<State> parent_states;
  std::size_t parent_count = 0;  // 0 means the target is the bare reward
};

struct ReplayBuffer {
  std::vector<BufferEntry> entries;
};

struct TrainLogRow {
  int epoch = 0;
  double policy_loss = 0.0;
  double critic_loss = 0.0;
  double entropy = 0.0;
  double mean_reward = 0.0;
  // Percentages, present only on epochs with an eval pass.
  std::optional<double> leaves_f1;
  std::optional<double> steps_f1;
  std::optional<double> inter_f1;
  std::optional<double> overall_allcorrect;
};

struct TrainLog {
  std::vector<double> warmup_losses;  // one mean loss per warm-up epoch
  std::vector<TrainLogRow> rows;      // one per RL epoch
  std::size_t pruned_transitions = 0;
};

struct WarmupResult {
  PolicyParams params;
  std::vector<double> epoch_losses;
};

// Supervised warm-up on gold single-step decisions: minimizes the negative
// full-softmax log likelihood of the gold action by minibatch gradient
// descent, reshuffling each epoch. Throws EmptyDataset.
WarmupResult warmup(const std::vector<Task>& tasks, PolicyParams params,
                    const TrainConfig& cfg, Rng& rng);

struct RolloutResult {
  Trajectory trajectory;
  std::vector<double> behavior_logprobs;  // per transition
  std::vector<double> values;             // critic value per state
  std::vector<bool> forced;               // forced-stop transitions
};

// Samples actions from the top-k renormalized distribution until End is
// drawn or a stopping rule fires; the final transition is always End.
RolloutResult rollout(const Task& task, const PolicyParams& params,
                      const CriticParams& critic, const TrainConfig& cfg,
                      Rng& rng);

// Rolls out sampled tasks, reconstructs and aligns each proof, assigns
// rewards and TD-targets, and appends transitions until the buffer is full
// (the last trajectory may be truncated).
ReplayBuffer fill_buffer(const std::vector<Task>& tasks,
                         const PolicyParams& params,
                         const CriticParams& critic, const TrainConfig& cfg,
                         Rng& rng);

struct UpdateStats {
  double policy_loss = 0.0;  // negative mean clipped surrogate
  double critic_loss = 0.0;
  double entropy = 0.0;
  double mean_reward = 0.0;
  std::size_t pruned = 0;  // buffer entries whose action left the top-k
};

// k-epoch PPO update over the buffer: clipped surrogate with entropy bonus
// for the policy (ratios against fill-time behavior logprobs), squared
// TD-error for the critic. Throws EmptyBuffer / NonFiniteLoss.
UpdateStats ppo_update(const ReplayBuffer& buffer, PolicyParams& params,
                       CriticParams& critic, const TrainConfig& cfg,
                       Rng& rng);

// Greedy (k = 1) rollouts scored against gold.
AggregateReport evaluate_greedy(const std::vector<Task>& tasks,
                                const PolicyParams& params,
                                const TrainConfig& cfg);

struct TrainResult {
  PolicyParams policy;
  CriticParams critic;
  TrainLog log;
};

PolicyParams init_policy(const TrainConfig& cfg);
CriticParams init_critic(const TrainConfig& cfg,
                         const PolicyParams& warmed_policy);

// Warm-up followed by rl_epochs of buffer filling + PPO updates, with
// periodic greedy evaluation on the holdout split. Deterministic for a
// fixed seed on a single thread.
TrainResult train(const std::vector<Task>& train_tasks,
                  const std::vector<Task>& holdout_tasks,
                  const TrainConfig& cfg);

}  // namespace proofrl

#endif  // PROOFRL_TRAINER_HPP_
