// proofrl: train and evaluate step-by-step proof construction policies on
// synthetic reasoning tasks, and score predicted proofs against gold.

#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "proofrl/errors.hpp"
#include "proofrl/ingest.hpp"
#include "proofrl/metrics.hpp"
#include "proofrl/proof.hpp"
#include "proofrl/trainer.hpp"

namespace {

using namespace proofrl;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct GenOptions {
  std::string out;
  int n_tasks = 100;
  int gold_leaves_min = 3;
  int gold_leaves_max = 3;
  EnvConfig env;
  std::string mode = "tree";
};

struct TrainOptions {
  std::string tasks_path;
  std::string holdout_path;
  std::string checkpoint_out;
  std::string log_out;
  std::string return_mode = "structured";
  TrainConfig cfg;
};

struct EvalOptions {
  std::string tasks_path;
  std::string checkpoint;
  std::string out;
  int jobs = 1;
  TrainConfig cfg;
};

struct ScoreOptions {
  std::string pred_path;
  std::string gold_path;
  std::string out;
  std::string similar = "jaccard";
  double jaccard_threshold = 0.5;
  std::string mode = "tree";
  bool strict = false;
};

struct CompareOptions {
  TrainOptions train;
  std::string out;
  int n_seeds = 5;
  std::string return_modes = "structured,chained";
  std::string r_redundants = "0,-0.25,-0.5,-0.75,-1";
  std::string rl = "on,off";
};

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::string current;
  for (const char c : csv) {
    if (c == ',') {
      if (!current.empty()) out.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  if (!current.empty()) out.push_back(current);
  return out;
}

ReturnMode parse_return_mode(const std::string& s) {
  if (s == "structured") return ReturnMode::Structured;
  if (s == "chained") return ReturnMode::Chained;
  throw ConfigInvalid("unknown return mode '" + s +
                      "' (expected structured|chained)");
}

// Shared training flags for the train and compare subcommands.
void add_train_flags(CLI::App* cmd, TrainOptions& opt) {
  cmd->add_option("--tasks", opt.tasks_path, "Training task JSONL file")
      ->required();
  cmd->add_option("--holdout", opt.holdout_path,
                  "Held-out task JSONL file for periodic greedy evaluation");
  cmd->add_option("--warmup-epochs", opt.cfg.warmup_epochs,
                  "Supervised warm-up epochs")
      ->capture_default_str();
  cmd->add_option("--warmup-batch", opt.cfg.warmup_batch,
                  "Warm-up minibatch size")
      ->capture_default_str();
  cmd->add_option("--lr-warmup", opt.cfg.lr_warmup, "Warm-up learning rate")
      ->capture_default_str();
  cmd->add_option("--rl-epochs", opt.cfg.rl_epochs,
                  "Buffer-fill + PPO update rounds")
      ->capture_default_str();
  cmd->add_option("--buffer-size", opt.cfg.buffer_size,
                  "Replay buffer capacity in transitions")
      ->capture_default_str();
  cmd->add_option("--minibatch", opt.cfg.minibatch, "PPO minibatch size")
      ->capture_default_str();
  cmd->add_option("--k-epochs", opt.cfg.k_epochs,
                  "Update epochs per filled buffer")
      ->capture_default_str();
  cmd->add_option("--clip-eps", opt.cfg.clip_eps, "PPO clipping range")
      ->capture_default_str();
  cmd->add_option("--entropy-beta", opt.cfg.entropy_beta,
                  "Entropy bonus coefficient")
      ->capture_default_str();
  cmd->add_option("--gamma", opt.cfg.returns.gamma, "Discount factor")
      ->capture_default_str();
  cmd->add_option("--return-mode", opt.return_mode,
                  "TD-target structure: structured|chained")
      ->capture_default_str();
  cmd->add_option("--r-correct", opt.cfg.rewards.r_correct,
                  "Reward for a perfectly matching step")
      ->capture_default_str();
  cmd->add_option("--r-redundant", opt.cfg.rewards.r_redundant,
                  "Reward for a step outside the reconstructed proof")
      ->capture_default_str();
  cmd->add_option("--r-erroneous", opt.cfg.rewards.r_erroneous,
                  "Reward for a non-matching step in the proof")
      ->capture_default_str();
  cmd->add_option("--r-end-correct", opt.cfg.rewards.r_end_correct,
                  "Reward for ending on the gold root")
      ->capture_default_str();
  cmd->add_option("--r-end-wrong", opt.cfg.rewards.r_end_wrong,
                  "Reward for ending anywhere else")
      ->capture_default_str();
  cmd->add_option("--lr-policy", opt.cfg.lr_policy, "Policy learning rate")
      ->capture_default_str();
  cmd->add_option("--lr-critic", opt.cfg.lr_critic, "Critic learning rate")
      ->capture_default_str();
  cmd->add_option("--top-k", opt.cfg.top_k,
                  "Actions retained after renormalization")
      ->capture_default_str();
  cmd->add_option("--hidden-dim", opt.cfg.hidden_dim,
                  "Hidden layer width of scorer and critic")
      ->capture_default_str();
  cmd->add_option("--max-arity", opt.cfg.env.max_arity,
                  "Maximum premises per Reason action")
      ->capture_default_str();
  cmd->add_option("--max-steps", opt.cfg.env.max_steps,
                  "Reasoning step budget per episode")
      ->capture_default_str();
  cmd->add_option("--eval-every", opt.cfg.eval_every,
                  "Evaluate the holdout every N epochs (0 = final only)")
      ->capture_default_str();
  cmd->add_flag("--freeze-targets",
                [&](std::size_t) { opt.cfg.refresh_targets = false; },
                "Keep fill-time TD-targets for all buffer epochs");
  cmd->add_flag("--normalize-advantages", opt.cfg.normalize_advantages,
                "Standardize advantages per buffer");
  cmd->add_flag("--critic-from-warmup", opt.cfg.critic_from_warmup,
                "Initialize the critic from warm-up state-feature weights");
  cmd->add_option("--seed", opt.cfg.seed, "Run seed")->capture_default_str();
}

int cmd_gen(const GenOptions& opt) {
  EnvConfig env = opt.env;
  env.mode = dag_mode_from_string(opt.mode);
  if (opt.n_tasks < 1) throw ConfigInvalid("--n-tasks must be >= 1");
  if (opt.gold_leaves_min < 2 || opt.gold_leaves_max < opt.gold_leaves_min) {
    throw ConfigInvalid("need 2 <= --gold-leaves-min <= --gold-leaves-max");
  }

  Rng rng(env.seed);
  std::vector<Task> tasks;
  for (int i = 0; i < opt.n_tasks; ++i) {
    EnvConfig task_env = env;
    task_env.n_gold_leaves =
        opt.gold_leaves_min +
        static_cast<int>(rng.below(static_cast<std::uint64_t>(
            opt.gold_leaves_max - opt.gold_leaves_min + 1)));
    task_env.validate();
    Task task = generate_task(task_env, rng);
    task.id = "t" + std::to_string(i + 1);
    tasks.push_back(std::move(task));
  }
  write_tasks(opt.out, tasks);
  std::cout << "wrote " << tasks.size() << " tasks to " << opt.out << "\n";
  return kExitOk;
}

int cmd_warmup(const TrainOptions& opt) {
  TrainConfig cfg = opt.cfg;
  cfg.returns.mode = parse_return_mode(opt.return_mode);
  cfg.rl_epochs = 0;
  cfg.validate();

  const std::vector<Task> tasks = load_tasks(opt.tasks_path);
  const TrainResult result = train(tasks, {}, cfg);
  write_checkpoint(opt.checkpoint_out, result.policy, result.critic);
  std::cout << "warm-up done; checkpoint at " << opt.checkpoint_out << "\n";
  return kExitOk;
}

int cmd_train(const TrainOptions& opt) {
  TrainConfig cfg = opt.cfg;
  cfg.returns.mode = parse_return_mode(opt.return_mode);
  cfg.validate();

  const std::vector<Task> tasks = load_tasks(opt.tasks_path);
  std::vector<Task> holdout;
  if (!opt.holdout_path.empty()) holdout = load_tasks(opt.holdout_path);

  const TrainResult result = train(tasks, holdout, cfg);
  write_checkpoint(opt.checkpoint_out, result.policy, result.critic);
  if (!opt.log_out.empty()) write_log(result.log, opt.log_out);
  std::cout << "training done; checkpoint at " << opt.checkpoint_out << "\n";
  return kExitOk;
}

AggregateReport parallel_eval(const std::vector<Task>& tasks,
                              const PolicyParams& policy,
                              const TrainConfig& cfg, int jobs) {
  TrainConfig greedy_cfg = cfg;
  greedy_cfg.top_k = 1;
  const CriticParams dummy{Mlp::zeros(kStateFeatureDim, 1)};

  std::vector<MetricsReport> reports(tasks.size());
  auto worker = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < tasks.size(); i += stride) {
      Rng rng(0);
      const RolloutResult rr =
          rollout(tasks[i], policy, dummy, greedy_cfg, rng);
      if (rr.trajectory.size() > 1) {
        const auto rec = reconstruct_proof(rr.trajectory, tasks[i].mode);
        IdSet universe;
        for (const Sentence& fact : tasks[i].facts) universe.insert(fact.id);
        reports[i] = score_pair(rec.dag, tasks[i].gold, exact_content_match(),
                                universe);
      }
    }
  };
  if (jobs <= 1) {
    worker(0, 1);
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < jobs; ++t) {
      threads.emplace_back(worker, static_cast<std::size_t>(t),
                           static_cast<std::size_t>(jobs));
    }
    for (std::thread& t : threads) t.join();
  }
  return aggregate(reports);
}

int cmd_eval(const EvalOptions& opt) {
  if (opt.jobs < 1) throw ConfigInvalid("--jobs must be >= 1");
  const std::vector<Task> tasks = load_tasks(opt.tasks_path);
  if (tasks.empty()) throw EmptyDataset("no tasks in " + opt.tasks_path);
  auto [policy, critic] = load_checkpoint(opt.checkpoint);

  const AggregateReport report =
      parallel_eval(tasks, policy, opt.cfg, opt.jobs);
  write_report(report, opt.out);
  std::cout << format_report(report) << "\n";
  return kExitOk;
}

int cmd_score(const ScoreOptions& opt) {
  SimilarFn similar;
  if (opt.similar == "exact") {
    similar = exact_content_match();
  } else if (opt.similar == "jaccard") {
    similar = token_jaccard_at_least(opt.jaccard_threshold);
  } else {
    throw ConfigInvalid("--similar must be exact|jaccard");
  }
  const DagMode mode = dag_mode_from_string(opt.mode);

  const LoadResult gold = load_dataset(opt.gold_path, opt.strict);
  for (const std::string& warning : gold.warnings) {
    std::cerr << "gold: " << warning << "\n";
  }

  // Predictions: JSON lines {"id", "proof"}.
  std::map<std::string, std::string> preds;
  {
    std::size_t line_no = 0;
    std::istringstream in(read_text_file(opt.pred_path));
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        preds[j.at("id").get<std::string>()] =
            j.at("proof").get<std::string>();
      } catch (const std::exception& e) {
        if (opt.strict) {
          throw ParseError(std::string("bad prediction: ") + e.what(),
                           line_no, 1);
        }
        std::cerr << "pred: line " << line_no << " skipped: " << e.what()
                  << "\n";
      }
    }
  }

  std::vector<MetricsReport> reports;
  for (const DatasetRecord& record : gold.records) {
    MetricsReport report;  // all-zero when missing or unparseable
    auto it = preds.find(record.id);
    if (it != preds.end()) {
      try {
        ProofDag pred = parse_proof(it->second, record.sentences);
        pred.mode = mode;
        ProofDag gold_dag = record.gold;
        gold_dag.mode = mode;
        IdSet universe;
        for (const auto& [id, sentence] : record.sentences) {
          if (sentence.kind == SentenceKind::Fact) universe.insert(id);
        }
        report = score_pair(pred, gold_dag, similar, universe);
      } catch (const Error& e) {
        if (opt.strict) throw;
        std::cerr << "pred '" << record.id << "' scored 0: " << e.what()
                  << "\n";
      }
    } else {
      std::cerr << "no prediction for '" << record.id << "'\n";
    }
    reports.push_back(report);
  }
  if (reports.empty()) throw EmptyDataset("gold file has no records");

  const AggregateReport agg = aggregate(reports);
  write_report(agg, opt.out);
  std::cout << format_report(agg) << "\n";
  return kExitOk;
}

int cmd_compare(const CompareOptions& opt) {
  TrainConfig base = opt.train.cfg;
  base.returns.mode = parse_return_mode(opt.train.return_mode);
  base.validate();
  if (opt.n_seeds < 1) throw ConfigInvalid("--seeds must be >= 1");
  if (opt.train.holdout_path.empty()) {
    throw ConfigInvalid("compare needs --holdout");
  }

  const std::vector<Task> tasks = load_tasks(opt.train.tasks_path);
  const std::vector<Task> holdout = load_tasks(opt.train.holdout_path);
  if (holdout.empty()) throw EmptyDataset("compare needs a holdout split");

  std::vector<bool> rl_grid;
  for (const std::string& v : split_list(opt.rl)) {
    if (v == "on") rl_grid.push_back(true);
    else if (v == "off") rl_grid.push_back(false);
    else throw ConfigInvalid("--rl entries must be on|off");
  }

  std::string csv =
      "return_mode,r_redundant,rl,seed,leaves_f1,leaves_ac,steps_f1,steps_ac,"
      "inter_f1,inter_ac,overall_ac\n";
  auto emit = [&](const std::string& mode, const std::string& penalty,
                  const std::string& rl, std::uint64_t seed,
                  const AggregateReport& agg) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "%s,%s,%s,%llu,%.1f,%.1f,%.1f,%.1f,%.1f,%.1f,%.1f\n",
                  mode.c_str(), penalty.c_str(), rl.c_str(),
                  static_cast<unsigned long long>(seed), agg.leaves_f1,
                  agg.leaves_ac, agg.steps_f1, agg.steps_ac, agg.inter_f1,
                  agg.inter_ac, agg.overall_ac);
    csv += buf;
  };

  for (const bool with_rl : rl_grid) {
    if (!with_rl) {
      for (int s = 0; s < opt.n_seeds; ++s) {
        TrainConfig cfg = base;
        cfg.seed = base.seed + static_cast<std::uint64_t>(s);
        cfg.rl_epochs = 0;
        const TrainResult result = train(tasks, {}, cfg);
        const AggregateReport agg =
            evaluate_greedy(holdout, result.policy, cfg);
        emit("-", "-", "off", cfg.seed, agg);
        std::cout << "rl=off seed=" << cfg.seed
                  << " overall_ac=" << agg.overall_ac << "\n";
      }
      continue;
    }
    for (const std::string& mode_name : split_list(opt.return_modes)) {
      const ReturnMode mode = parse_return_mode(mode_name);
      for (const std::string& penalty : split_list(opt.r_redundants)) {
        for (int s = 0; s < opt.n_seeds; ++s) {
          TrainConfig cfg = base;
          cfg.seed = base.seed + static_cast<std::uint64_t>(s);
          cfg.returns.mode = mode;
          cfg.rewards.r_redundant = std::stod(penalty);
          const TrainResult result = train(tasks, holdout, cfg);
          const AggregateReport agg =
              evaluate_greedy(holdout, result.policy, cfg);
          emit(mode_name, penalty, "on", cfg.seed, agg);
          std::cout << "rl=on mode=" << mode_name << " r_red=" << penalty
                    << " seed=" << cfg.seed
                    << " overall_ac=" << agg.overall_ac << "\n";
        }
      }
    }
  }
  write_text_file(opt.out, csv);
  std::cout << "wrote ablation grid to " << opt.out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Step-by-step proof construction with reinforcement learning"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read defaults from a config file");

  GenOptions gen;
  CLI::App* gen_cmd =
      app.add_subcommand("gen", "Generate a synthetic task file");
  gen_cmd->add_option("--out", gen.out, "Output task JSONL path")->required();
  gen_cmd->add_option("--n-tasks", gen.n_tasks, "Number of tasks")
      ->capture_default_str();
  gen_cmd->add_option("--gold-leaves-min", gen.gold_leaves_min,
                      "Minimum gold leaves per task")
      ->capture_default_str();
  gen_cmd->add_option("--gold-leaves-max", gen.gold_leaves_max,
                      "Maximum gold leaves per task")
      ->capture_default_str();
  gen_cmd->add_option("--n-distractors", gen.env.n_distractors,
                      "Distractor facts per task")
      ->capture_default_str();
  gen_cmd->add_option("--max-arity", gen.env.max_arity,
                      "Maximum premises per gold step")
      ->capture_default_str();
  gen_cmd->add_option("--max-steps", gen.env.max_steps,
                      "Episode step budget recorded with the task")
      ->capture_default_str();
  gen_cmd->add_option("--symbols-per-leaf", gen.env.symbols_per_leaf,
                      "Fresh symbols per gold leaf")
      ->capture_default_str();
  gen_cmd
      ->add_option("--distractor-borrow-prob", gen.env.distractor_borrow_prob,
                   "Chance a distractor borrows one gold symbol")
      ->capture_default_str();
  gen_cmd->add_option("--mode", gen.mode, "tree|graph")->capture_default_str();
  gen_cmd->add_option("--seed", gen.env.seed, "Generation seed")
      ->capture_default_str();

  TrainOptions warmup_opt;
  CLI::App* warmup_cmd =
      app.add_subcommand("warmup", "Supervised warm-up only");
  add_train_flags(warmup_cmd, warmup_opt);
  warmup_cmd->add_option("--out", warmup_opt.checkpoint_out,
                         "Checkpoint output path")
      ->required();

  TrainOptions train_opt;
  CLI::App* train_cmd =
      app.add_subcommand("train", "Warm-up followed by PPO training");
  add_train_flags(train_cmd, train_opt);
  train_cmd->add_option("--out", train_opt.checkpoint_out,
                        "Checkpoint output path")
      ->required();
  train_cmd->add_option("--log", train_opt.log_out, "Training CSV log path");

  EvalOptions eval_opt;
  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "Greedy rollouts on held-out tasks, scored against gold");
  eval_cmd->add_option("--tasks", eval_opt.tasks_path, "Task JSONL file")
      ->required();
  eval_cmd->add_option("--checkpoint", eval_opt.checkpoint, "Checkpoint path")
      ->required();
  eval_cmd->add_option("--out", eval_opt.out, "Report JSON output path")
      ->required();
  eval_cmd->add_option("--max-arity", eval_opt.cfg.env.max_arity,
                       "Maximum premises per Reason action")
      ->capture_default_str();
  eval_cmd->add_option("--max-steps", eval_opt.cfg.env.max_steps,
                       "Reasoning step budget per episode")
      ->capture_default_str();
  eval_cmd->add_option("--jobs", eval_opt.jobs, "Parallel rollout threads")
      ->capture_default_str();

  ScoreOptions score_opt;
  CLI::App* score_cmd = app.add_subcommand(
      "score", "Score predicted proof strings against a gold dataset");
  score_cmd->add_option("--pred", score_opt.pred_path,
                        "Predictions JSONL ({\"id\", \"proof\"})")
      ->required();
  score_cmd->add_option("--gold", score_opt.gold_path, "Gold dataset JSONL")
      ->required();
  score_cmd->add_option("--out", score_opt.out, "Report JSON output path")
      ->required();
  score_cmd->add_option("--similar", score_opt.similar,
                        "Conclusion similarity: exact|jaccard")
      ->capture_default_str();
  score_cmd->add_option("--jaccard-threshold", score_opt.jaccard_threshold,
                        "Token-Jaccard threshold for --similar jaccard")
      ->capture_default_str();
  score_cmd->add_option("--mode", score_opt.mode, "tree|graph")
      ->capture_default_str();
  score_cmd->add_flag("--strict", score_opt.strict,
                      "Abort on the first malformed line");

  CompareOptions compare_opt;
  CLI::App* compare_cmd = app.add_subcommand(
      "compare",
      "Ablation grid: return mode x redundant penalty x with/without RL");
  add_train_flags(compare_cmd, compare_opt.train);
  compare_cmd->add_option("--out", compare_opt.out, "Grid CSV output path")
      ->required();
  compare_cmd->add_option("--seeds", compare_opt.n_seeds,
                          "Seeds per configuration (base --seed + 0..N-1)")
      ->capture_default_str();
  compare_cmd
      ->add_option("--return-modes", compare_opt.return_modes,
                   "Comma list of return modes for the rl=on arm")
      ->capture_default_str();
  compare_cmd
      ->add_option("--r-redundants", compare_opt.r_redundants,
                   "Comma list of redundant-step penalties")
      ->capture_default_str();
  compare_cmd->add_option("--rl", compare_opt.rl, "Comma list of on/off arms")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen(gen);
    if (warmup_cmd->parsed()) return cmd_warmup(warmup_opt);
    if (train_cmd->parsed()) return cmd_train(train_opt);
    if (eval_cmd->parsed()) return cmd_eval(eval_opt);
    if (score_cmd->parsed()) return cmd_score(score_opt);
    if (compare_cmd->parsed()) return cmd_compare(compare_opt);
  } catch (const ConfigInvalid& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
