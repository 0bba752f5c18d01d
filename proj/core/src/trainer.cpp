#include "proofrl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "proofrl/errors.hpp"
#include "proofrl/proof.hpp"

namespace proofrl {

void TrainConfig::validate() const {
  env.validate();
  returns.validate();
  if (hidden_dim < 1) throw ConfigInvalid("hidden_dim must be >= 1");
  if (top_k < 1) throw ConfigInvalid("top_k must be >= 1");
  if (warmup_epochs < 0) throw ConfigInvalid("warmup_epochs must be >= 0");
  if (warmup_batch < 1) throw ConfigInvalid("warmup_batch must be >= 1");
  if (rl_epochs < 0) throw ConfigInvalid("rl_epochs must be >= 0");
  if (minibatch < 1) throw ConfigInvalid("minibatch must be >= 1");
  if (buffer_size < minibatch) {
    throw ConfigInvalid("buffer_size must be >= minibatch");
  }
  if (k_epochs < 1) throw ConfigInvalid("k_epochs must be >= 1");
  if (clip_eps <= 0.0) throw ConfigInvalid("clip_eps must be > 0");
  if (eval_every < 0) throw ConfigInvalid("eval_every must be >= 0");
}

namespace {

EnvConfig stop_config(const TrainConfig& cfg, const Task& task) {
  EnvConfig stop = cfg.env;
  stop.mode = task.mode;
  return stop;
}

}  // namespace

WarmupResult warmup(const std::vector<Task>& tasks, PolicyParams params,
                    const TrainConfig& cfg, Rng& rng) {
  if (tasks.empty()) throw EmptyDataset("warmup needs at least one task");

  // The supervised pairs are fixed, so proposals and features are computed
  // once and reused across epochs.
  struct Pair {
    std::vector<Action> proposals;
    FeatureMatrix features;
    Action gold;
  };
  std::vector<Pair> pairs;
  for (const Task& task : tasks) {
    for (auto& [state, action] : gold_to_steps(task)) {
      Pair pair;
      pair.proposals = propose_actions(state, cfg.env.max_arity);
      pair.features = action_feature_matrix(state, pair.proposals);
      pair.gold = std::move(action);
      pairs.push_back(std::move(pair));
    }
  }

  WarmupResult result{std::move(params), {}};
  for (int epoch = 0; epoch < cfg.warmup_epochs; ++epoch) {
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    double epoch_loss = 0.0;
    std::size_t counted = 0;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(cfg.warmup_batch)) {
      const std::size_t end = std::min(
          order.size(), begin + static_cast<std::size_t>(cfg.warmup_batch));
      Mlp grad = Mlp::zeros(result.params.scorer.in_dim,
                            result.params.scorer.hidden_dim);
      double batch_loss = 0.0;
      for (std::size_t o = begin; o < end; ++o) {
        const Pair& pair = pairs[order[o]];
        const int k_full = static_cast<int>(pair.proposals.size());
        const auto dist = action_distribution(result.params, pair.features,
                                              pair.proposals, k_full);
        batch_loss -= *try_logprob(dist, pair.gold);
        accumulate_policy_grad(result.params, pair.features, dist, pair.gold,
                               1.0, grad);
      }
      const double m = static_cast<double>(end - begin);
      if (!std::isfinite(batch_loss) || !grad.finite()) {
        throw NonFiniteLoss("non-finite warm-up loss in epoch " +
                            std::to_string(epoch + 1));
      }
      // Ascend log likelihood = descend the negative log likelihood.
      result.params.scorer.add_scaled(grad, cfg.lr_warmup / m);
      epoch_loss += batch_loss;
      counted += end - begin;
    }
    result.epoch_losses.push_back(epoch_loss /
                                  static_cast<double>(counted));
  }
  return result;
}

RolloutResult rollout(const Task& task, const PolicyParams& params,
                      const CriticParams& critic, const TrainConfig& cfg,
                      Rng& rng) {
  const EnvConfig stop_cfg = stop_config(cfg, task);
  RolloutResult result;
  State state = initial_state(task);
  std::optional<Sentence> last_conclusion;

  while (true) {
    const double v = value(critic, state);
    if (should_stop(state, last_conclusion, stop_cfg)) {
      result.trajectory.transitions.push_back(
          {state, Action::end(), 0.0, false, true});
      result.behavior_logprobs.push_back(0.0);
      result.values.push_back(v);
      result.forced.push_back(true);
      break;
    }
    const auto proposals = propose_actions(state, cfg.env.max_arity);
    const auto dist = action_distribution(params, state, proposals, cfg.top_k);
    const Action action = sample_action(dist, rng);
    const double lp = *try_logprob(dist, action);

    if (action.is_end) {
      result.trajectory.transitions.push_back(
          {state, action, 0.0, false, true});
      result.behavior_logprobs.push_back(lp);
      result.values.push_back(v);
      result.forced.push_back(false);
      break;
    }
    auto [next, conclusion] = apply_action(state, action, task.mode);
    result.trajectory.transitions.push_back({state, action, 0.0, false, false});
    result.behavior_logprobs.push_back(lp);
    result.values.push_back(v);
    result.forced.push_back(false);
    state = std::move(next);
    last_conclusion = std::move(conclusion);
  }
  return result;
}

ReplayBuffer fill_buffer(const std::vector<Task>& tasks,
                         const PolicyParams& params,
                         const CriticParams& critic, const TrainConfig& cfg,
                         Rng& rng) {
  ReplayBuffer buffer;
  const std::size_t capacity = static_cast<std::size_t>(cfg.buffer_size);
  while (buffer.entries.size() < capacity) {
    const Task& task =
        tasks[static_cast<std::size_t>(rng.below(tasks.size()))];
    RolloutResult rr = rollout(task, params, critic, cfg, rng);
    const auto& transitions = rr.trajectory.transitions;
    const std::size_t last = transitions.size() - 1;

    Trajectory rewarded;
    ProofDag pred;
    bool has_proof = transitions.size() > 1;
    if (has_proof) {
      auto rec = reconstruct_proof(rr.trajectory, task.mode);
      IdSet universe;
      for (const Sentence& fact : task.facts) universe.insert(fact.id);
      const Alignment alignment =
          align_to_gold(rec.dag, task.gold, universe);
      rewarded = assign_rewards(rr.trajectory, rec.dag, rec.redundant,
                                alignment, task.gold.root, cfg.rewards);
      pred = std::move(rec.dag);
    } else {
      // Ending with no Reason step proves nothing; there is no dag to
      // align, so the End transition just takes the wrong-stop reward.
      rewarded = rr.trajectory;
      rewarded.transitions[0].reward = cfg.rewards.r_end_wrong;
    }

    const std::vector<double> targets =
        has_proof ? td_targets(rewarded, pred, rr.values, cfg.returns)
                  : std::vector<double>{rewarded.transitions[0].reward};

    for (std::size_t t = 0; t < rewarded.transitions.size(); ++t) {
      if (buffer.entries.size() >= capacity) break;
      const Transition& tr = rewarded.transitions[t];
      BufferEntry entry;
      entry.state = tr.state;
      entry.action = tr.action;
      entry.reward = tr.reward;
      entry.behavior_logprob = rr.behavior_logprobs[t];
      entry.forced = rr.forced[t];
      entry.td_target = targets[t];
      entry.value = rr.values[t];
      entry.in_pred_dag = tr.in_pred_dag;
      if (!tr.action.is_end) {
        const auto parents =
            cfg.returns.mode == ReturnMode::Chained
                ? std::vector<std::size_t>{t + 1}
                : parents_of(t, pred, rewarded);
        entry.parent_count = parents.size();
        for (const std::size_t p : parents) {
          if (p < last) entry.parent_states.push_back(transitions[p].state);
        }
      }
      buffer.entries.push_back(std::move(entry));
    }
  }
  return buffer;
}

namespace {

double recomputed_target(const BufferEntry& entry, const CriticParams& critic,
                         double gamma) {
  if (entry.parent_count == 0) return entry.reward;
  double sum = 0.0;
  for (const State& parent : entry.parent_states) {
    sum += value(critic, parent);
  }
  return entry.reward +
         gamma * sum / static_cast<double>(entry.parent_count);
}

}  // namespace

UpdateStats ppo_update(const ReplayBuffer& buffer, PolicyParams& params,
                       CriticParams& critic, const TrainConfig& cfg,
                       Rng& rng) {
  if (buffer.entries.size() == 0) {
    throw EmptyBuffer("ppo_update needs a non-empty buffer");
  }
  const std::size_t n = buffer.entries.size();

  UpdateStats stats;
  for (const BufferEntry& entry : buffer.entries) {
    stats.mean_reward += entry.reward;
  }
  stats.mean_reward /= static_cast<double>(n);

  // Buffer states are fixed for the whole update; featurize them once.
  std::vector<std::vector<Action>> proposals(n);
  std::vector<FeatureMatrix> features(n);
  std::vector<std::vector<double>> state_feats(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!buffer.entries[i].forced) {
      proposals[i] =
          propose_actions(buffer.entries[i].state, cfg.env.max_arity);
      features[i] = action_feature_matrix(buffer.entries[i].state,
                                          proposals[i]);
    }
    state_feats[i] = state_features(buffer.entries[i].state);
  }

  double loss_weight = 0.0;
  for (int k = 0; k < cfg.k_epochs; ++k) {
    // Advantages against the fill-time value baseline; targets optionally
    // refreshed with the current critic.
    std::vector<double> targets(n);
    for (std::size_t i = 0; i < n; ++i) {
      targets[i] = cfg.refresh_targets
                       ? recomputed_target(buffer.entries[i], critic,
                                           cfg.returns.gamma)
                       : buffer.entries[i].td_target;
    }
    std::vector<double> adv(n);
    for (std::size_t i = 0; i < n; ++i) {
      adv[i] = targets[i] - buffer.entries[i].value;
    }
    if (cfg.normalize_advantages && n > 1) {
      double mean = 0.0;
      for (const double a : adv) mean += a;
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (const double a : adv) var += (a - mean) * (a - mean);
      const double sd = std::sqrt(var / static_cast<double>(n));
      for (double& a : adv) a = (a - mean) / (sd + 1e-8);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    for (std::size_t begin = 0; begin < n;
         begin += static_cast<std::size_t>(cfg.minibatch)) {
      const std::size_t end =
          std::min(n, begin + static_cast<std::size_t>(cfg.minibatch));

      Mlp pgrad = Mlp::zeros(params.scorer.in_dim, params.scorer.hidden_dim);
      double surrogate_sum = 0.0;
      double entropy_sum = 0.0;
      std::size_t counted = 0;
      for (std::size_t o = begin; o < end; ++o) {
        const std::size_t i = order[o];
        const BufferEntry& entry = buffer.entries[i];
        if (entry.forced) continue;
        const auto dist =
            action_distribution(params, features[i], proposals[i], cfg.top_k);
        const auto lp = try_logprob(dist, entry.action);
        if (!lp) {
          ++stats.pruned;
          continue;
        }
        const double ratio = std::exp(*lp - entry.behavior_logprob);
        if (!std::isfinite(ratio)) {
          throw NonFiniteLoss("non-finite ratio at buffer entry " +
                              std::to_string(i));
        }
        const double a = adv[i];
        const double clipped =
            std::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
        surrogate_sum += std::min(ratio * a, clipped * a);
        entropy_sum += dist.entropy();

        // The clipped branch of min() has zero gradient; otherwise
        // d(ratio * A)/d theta = A * ratio * d log pi / d theta.
        const bool clip_active = (a >= 0.0 && ratio > 1.0 + cfg.clip_eps) ||
                                 (a < 0.0 && ratio < 1.0 - cfg.clip_eps);
        if (!clip_active) {
          accumulate_policy_grad(params, features[i], dist, entry.action,
                                 a * ratio, pgrad);
        }
        accumulate_entropy_grad(params, features[i], dist, cfg.entropy_beta,
                                pgrad);
        ++counted;
      }
      if (counted > 0) {
        const double m = static_cast<double>(counted);
        if (!pgrad.finite()) {
          throw NonFiniteLoss("non-finite policy gradient");
        }
        params.scorer.add_scaled(pgrad, cfg.lr_policy / m);
        stats.policy_loss += -surrogate_sum / m;
        stats.entropy += entropy_sum / m;
        loss_weight += 1.0;
      }

      Mlp cgrad = Mlp::zeros(critic.value_head.in_dim,
                             critic.value_head.hidden_dim);
      double critic_sum = 0.0;
      for (std::size_t o = begin; o < end; ++o) {
        const std::size_t i = order[o];
        const double err =
            critic.value_head.forward(state_feats[i]) - targets[i];
        critic_sum += err * err;
        critic.value_head.backward(state_feats[i], 2.0 * err, cgrad);
      }
      const double mc = static_cast<double>(end - begin);
      if (!std::isfinite(critic_sum) || !cgrad.finite()) {
        throw NonFiniteLoss("non-finite critic loss");
      }
      critic.value_head.add_scaled(cgrad, -cfg.lr_critic / mc);
      stats.critic_loss += critic_sum / mc;
    }
  }

  const double n_batches = static_cast<double>(cfg.k_epochs) *
                           std::ceil(static_cast<double>(n) /
                                     static_cast<double>(cfg.minibatch));
  if (loss_weight > 0.0) stats.policy_loss /= loss_weight;
  if (loss_weight > 0.0) stats.entropy /= loss_weight;
  stats.critic_loss /= n_batches;
  return stats;
}

PolicyParams init_policy(const TrainConfig& cfg) {
  Rng rng = Rng::substream(cfg.seed, 0);
  return PolicyParams{
      Mlp::random_init(kActionFeatureDim, cfg.hidden_dim, rng)};
}

CriticParams init_critic(const TrainConfig& cfg,
                         const PolicyParams& warmed_policy) {
  Rng rng = Rng::substream(cfg.seed, 3);
  CriticParams critic{
      Mlp::random_init(kStateFeatureDim, cfg.hidden_dim, rng)};
  if (cfg.critic_from_warmup) {
    // The scorer's state-feature columns sit after the action block; their
    // hidden responses transfer to the critic as an init.
    const Mlp& scorer = warmed_policy.scorer;
    for (int j = 0; j < cfg.hidden_dim; ++j) {
      for (int i = 0; i < kStateFeatureDim; ++i) {
        critic.value_head.w1[static_cast<std::size_t>(j) * kStateFeatureDim +
                             i] =
            scorer.w1[static_cast<std::size_t>(j) * kActionFeatureDim + 8 + i];
      }
      critic.value_head.b1[static_cast<std::size_t>(j)] =
          scorer.b1[static_cast<std::size_t>(j)];
      critic.value_head.w2[static_cast<std::size_t>(j)] =
          scorer.w2[static_cast<std::size_t>(j)];
    }
    critic.value_head.b2 = scorer.b2;
  }
  return critic;
}

AggregateReport evaluate_greedy(const std::vector<Task>& tasks,
                                const PolicyParams& params,
                                const TrainConfig& cfg) {
  TrainConfig greedy_cfg = cfg;
  greedy_cfg.top_k = 1;
  const CriticParams dummy{Mlp::zeros(kStateFeatureDim, 1)};

  std::vector<MetricsReport> reports;
  for (const Task& task : tasks) {
    Rng rng(0);  // greedy sampling draws are degenerate
    const RolloutResult rr = rollout(task, params, dummy, greedy_cfg, rng);
    MetricsReport report;  // zero scores when nothing was proven
    if (rr.trajectory.size() > 1) {
      const auto rec = reconstruct_proof(rr.trajectory, task.mode);
      IdSet universe;
      for (const Sentence& fact : task.facts) universe.insert(fact.id);
      report = score_pair(rec.dag, task.gold, exact_content_match(), universe);
    }
    reports.push_back(report);
  }
  return aggregate(reports);
}

TrainResult train(const std::vector<Task>& train_tasks,
                  const std::vector<Task>& holdout_tasks,
                  const TrainConfig& cfg) {
  cfg.validate();
  if (train_tasks.empty()) throw EmptyDataset("train needs tasks");

  TrainResult result{init_policy(cfg), CriticParams{}, {}};

  Rng warmup_rng = Rng::substream(cfg.seed, 1);
  WarmupResult warmed =
      warmup(train_tasks, std::move(result.policy), cfg, warmup_rng);
  result.policy = std::move(warmed.params);
  result.log.warmup_losses = std::move(warmed.epoch_losses);

  result.critic = init_critic(cfg, result.policy);

  Rng rl_rng = Rng::substream(cfg.seed, 2);
  for (int epoch = 1; epoch <= cfg.rl_epochs; ++epoch) {
    const ReplayBuffer buffer =
        fill_buffer(train_tasks, result.policy, result.critic, cfg, rl_rng);
    const UpdateStats stats =
        ppo_update(buffer, result.policy, result.critic, cfg, rl_rng);

    TrainLogRow row;
    row.epoch = epoch;
    row.policy_loss = stats.policy_loss;
    row.critic_loss = stats.critic_loss;
    row.entropy = stats.entropy;
    row.mean_reward = stats.mean_reward;
    result.log.pruned_transitions += stats.pruned;

    const bool eval_now =
        !holdout_tasks.empty() &&
        ((cfg.eval_every > 0 && epoch % cfg.eval_every == 0) ||
         epoch == cfg.rl_epochs);
    if (eval_now) {
      const AggregateReport agg =
          evaluate_greedy(holdout_tasks, result.policy, cfg);
      row.leaves_f1 = agg.leaves_f1;
      row.steps_f1 = agg.steps_f1;
      row.inter_f1 = agg.inter_f1;
      row.overall_allcorrect = agg.overall_ac;
    }
    result.log.rows.push_back(row);
  }
  return result;
}

}  // namespace proofrl
