#include <doctest.h>

#include "proofrl/errors.hpp"
#include "proofrl/ingest.hpp"
#include "proofrl/metrics.hpp"
#include "proofrl/proof.hpp"
#include "testutil.hpp"

using namespace proofrl;
using namespace proofrl::testutil;

namespace {

ProofDag dag_of(std::vector<Step> steps, IdSet leaves, DagMode mode) {
  ProofDag dag;
  dag.steps = std::move(steps);
  dag.root = dag.steps.back().conclusion.id;
  dag.leaves = std::move(leaves);
  dag.mode = mode;
  return dag;
}

// The two step-structure mismatches from real error analyses: right leaves
// combined in the wrong order, and a flat gold step split into two.
struct StepFixtures {
  SentenceMap sentences;
  ProofDag gold1, pred1;
  ProofDag gold2, pred2;
};

StepFixtures g1_fixtures() {
  StepFixtures fx;
  for (const std::string id : {"x24", "x5", "x23", "x1", "x2", "x3"}) {
    fx.sentences[id] = Sentence{id, tokenize("fact " + id),
                                SentenceKind::Fact, "fact " + id};
  }
  fx.gold1 = parse_proof("x24 & x5 -> i1: t; i1 & x23 -> hypothesis",
                         fx.sentences);
  fx.pred1 = parse_proof("x23 & x5 -> i1: t; i1 & x24 -> i2: t",
                         fx.sentences);
  fx.gold2 = parse_proof("x1 & x2 & x3 -> hypothesis", fx.sentences);
  fx.pred2 = parse_proof("x1 & x2 -> i1: t; i1 & x3 -> i2: t", fx.sentences);
  return fx;
}

}  // namespace

TEST_CASE("leaves_score") {
  ProofDag pred;
  ProofDag gold;
  gold.leaves = IdSet{"x1", "x2"};

  SUBCASE("identical leaf sets") {
    pred.leaves = IdSet{"x1", "x2"};
    const auto s = leaves_score(pred, gold);
    CHECK(s.f1 == 1.0);
    CHECK(s.allcorrect);
  }
  SUBCASE("a superset costs precision") {
    pred.leaves = IdSet{"x1", "x2", "x3"};
    const auto s = leaves_score(pred, gold);
    CHECK(s.f1 == doctest::Approx(0.8));
    CHECK_FALSE(s.allcorrect);
  }
  SUBCASE("disjoint sets score zero") {
    pred.leaves = IdSet{"x8", "x9"};
    const auto s = leaves_score(pred, gold);
    CHECK(s.f1 == 0.0);
    CHECK_FALSE(s.allcorrect);
  }
}

TEST_CASE("steps_score on an identical prediction") {
  Rng rng(77);
  EnvConfig cfg;
  cfg.n_gold_leaves = 4;
  const Task task = generate_task(cfg, rng);
  const Alignment alignment = align_to_gold(task.gold, task.gold);
  const auto s = steps_score(task.gold, task.gold, alignment);
  CHECK(s.f1 == 1.0);
  CHECK(s.allcorrect);
}

TEST_CASE("wrong combination order fails steps but keeps leaves") {
  const auto fx = g1_fixtures();
  const Alignment alignment = align_to_gold(fx.pred1, fx.gold1);

  const auto leaves = leaves_score(fx.pred1, fx.gold1);
  CHECK(leaves.f1 == 1.0);

  const auto steps = steps_score(fx.pred1, fx.gold1, alignment);
  CHECK_FALSE(steps.allcorrect);
  CHECK(steps.tp == 0);
}

TEST_CASE("splitting a flat gold step fails steps") {
  const auto fx = g1_fixtures();
  const Alignment alignment = align_to_gold(fx.pred2, fx.gold2);
  const auto steps = steps_score(fx.pred2, fx.gold2, alignment);
  CHECK_FALSE(steps.allcorrect);
}

TEST_CASE("intermediates_score") {
  Rng rng(79);
  EnvConfig cfg;
  cfg.n_gold_leaves = 3;
  const Task task = generate_task(cfg, rng);

  SUBCASE("oracle conclusions on a matching tree") {
    const Alignment alignment = align_to_gold(task.gold, task.gold);
    const auto s = intermediates_score(task.gold, task.gold, alignment,
                                       exact_content_match());
    CHECK(s.f1 == 1.0);
    CHECK(s.allcorrect);
  }
  SUBCASE("one NULL among two intermediates caps F1 at 2/3") {
    // Prediction with one perfect subtree and one disjoint one.
    Task t;
    t.facts = {fact("x1", {"a"}), fact("x2", {"b"}), fact("x3", {"c"}),
               fact("x4", {"d"}), fact("x5", {"e"}), fact("x6", {"f"})};
    t.hypothesis = conclusion("h", {"a", "b", "c"});
    t.gold = dag_of({step({"x1", "x2"}, conclusion("i1", {"a", "b"})),
                     step({"i1", "x3"}, conclusion("h", {"a", "b", "c"}))},
                    IdSet{"x1", "x2", "x3"}, DagMode::Tree);

    const ProofDag pred =
        dag_of({step({"x1", "x2"}, conclusion("i1", {"a", "b"})),
                step({"x5", "x6"}, conclusion("i2", {"e", "f"})),
                step({"i1", "i2"}, conclusion("i3", {"a", "b", "e", "f"}))},
               IdSet{"x1", "x2", "x5", "x6"}, DagMode::Tree);
    const Alignment alignment = align_to_gold(pred, t.gold);
    const auto s = intermediates_score(pred, t.gold, alignment,
                                       exact_content_match());
    CHECK(s.f1 <= 2.0 / 3.0 + 1e-12);
    CHECK_FALSE(s.allcorrect);
  }
  SUBCASE("empty prediction against non-empty gold") {
    ProofDag empty;
    empty.leaves = task.gold.leaves;
    const auto s = intermediates_score(empty, task.gold, Alignment{},
                                       exact_content_match());
    CHECK(s.f1 == 0.0);
    CHECK_FALSE(s.allcorrect);
  }
}

TEST_CASE("overall_allcorrect requires every dimension") {
  MetricsReport report;
  report.leaves.allcorrect = true;
  report.steps.allcorrect = true;
  report.intermediates.allcorrect = true;
  CHECK(overall_allcorrect(report));
  report.intermediates.allcorrect = false;
  CHECK_FALSE(overall_allcorrect(report));
  report.intermediates.allcorrect = true;
  report.leaves.allcorrect = false;
  CHECK_FALSE(overall_allcorrect(report));
}

TEST_CASE("graph_accuracy") {
  Rng rng(83);
  EnvConfig cfg;
  cfg.n_gold_leaves = 4;
  cfg.mode = DagMode::Graph;
  const Task task = generate_task(cfg, rng);

  SUBCASE("identity") {
    CHECK(graph_accuracy(task.gold, task.gold, exact_content_match()));
  }
  SUBCASE("intermediate relabeling is invisible") {
    ProofDag relabeled = task.gold;
    for (Step& s : relabeled.steps) {
      std::vector<std::string> premises = s.premises.items();
      for (std::string& p : premises) {
        if (p == "i1") p = "i9";
      }
      s.premises = IdSet(premises);
      if (s.conclusion.id == "i1") s.conclusion.id = "i9";
    }
    CHECK(graph_accuracy(relabeled, task.gold, exact_content_match()));
  }
  SUBCASE("an extra step breaks it") {
    ProofDag bigger = task.gold;
    bigger.steps.insert(
        bigger.steps.begin(),
        step({"x1", "x2"}, conclusion("i8", {"zz"})));
    CHECK_FALSE(graph_accuracy(bigger, task.gold, exact_content_match()));
  }
  SUBCASE("a dissimilar conclusion breaks it") {
    ProofDag off = task.gold;
    off.steps[0].conclusion.symbols.insert("zzz");
    CHECK_FALSE(graph_accuracy(off, task.gold, exact_content_match()));
  }
  SUBCASE("oversized graphs are rejected") {
    ProofDag big;
    big.mode = DagMode::Graph;
    big.leaves = IdSet{"x1", "x2"};
    for (int k = 1; k <= 11; ++k) {
      big.steps.push_back(step({"x1", "x2"},
                               conclusion("i" + std::to_string(k), {"a"})));
    }
    big.root = "i11";
    CHECK_THROWS_AS(graph_accuracy(big, big, exact_content_match()),
                    GraphTooLarge);
  }
}

TEST_CASE("aggregate") {
  MetricsReport perfect;
  perfect.leaves = {1.0, true, 2, 0, 0};
  perfect.steps = {1.0, true, 2, 0, 0};
  perfect.intermediates = {1.0, true, 2, 0, 0};
  perfect.overall_allcorrect = true;

  SUBCASE("single report maps to percentages") {
    const auto agg = aggregate({perfect});
    CHECK(agg.n == 1);
    CHECK(agg.leaves_f1 == 100.0);
    CHECK(agg.overall_ac == 100.0);
  }
  SUBCASE("flags average to 50") {
    MetricsReport zero;
    const auto agg = aggregate({perfect, zero});
    CHECK(agg.overall_ac == 50.0);
    CHECK(agg.leaves_ac == 50.0);
  }
  SUBCASE("f1 means") {
    MetricsReport a, b;
    a.leaves.f1 = 0.8;
    b.leaves.f1 = 0.4;
    const auto agg = aggregate({a, b});
    CHECK(agg.leaves_f1 == doctest::Approx(60.0));
  }
  SUBCASE("empty input") {
    CHECK_THROWS_AS(aggregate({}), EmptyInput);
  }
}

TEST_CASE("gold scored against itself is perfect") {
  Rng rng(89);
  for (int iter = 0; iter < 100; ++iter) {
    EnvConfig cfg;
    cfg.n_gold_leaves = 2 + static_cast<int>(rng.below(5));
    cfg.n_distractors = static_cast<int>(rng.below(5));
    cfg.mode = iter % 2 ? DagMode::Graph : DagMode::Tree;
    const Task task = generate_task(cfg, rng);
    const MetricsReport report =
        score_pair(task.gold, task.gold, exact_content_match());
    CHECK(report.leaves.f1 == 1.0);
    CHECK(report.steps.f1 == 1.0);
    CHECK(report.intermediates.f1 == 1.0);
    CHECK(report.overall_allcorrect);
    if (cfg.mode == DagMode::Graph) {
      REQUIRE(report.graph_accuracy.has_value());
      CHECK(*report.graph_accuracy);
    }
  }
}

TEST_CASE("metrics are invariant under intermediate relabeling") {
  Rng rng(97);
  EnvConfig cfg;
  cfg.n_gold_leaves = 4;
  cfg.n_distractors = 2;
  const Task task = generate_task(cfg, rng);
  const Trajectory traj = random_trajectory(task, 3, rng);
  const auto rec = reconstruct_proof(traj, task.mode);

  ProofDag relabeled = rec.dag;
  auto swap_id = [](std::string& id) {
    if (id == "i1") id = "i2";
    else if (id == "i2") id = "i1";
  };
  for (Step& s : relabeled.steps) {
    std::vector<std::string> premises = s.premises.items();
    for (std::string& p : premises) swap_id(p);
    s.premises = IdSet(premises);
    swap_id(s.conclusion.id);
  }
  swap_id(relabeled.root);

  const auto r1 = score_pair(rec.dag, task.gold, exact_content_match());
  const auto r2 = score_pair(relabeled, task.gold, exact_content_match());
  CHECK(r1.leaves.f1 == r2.leaves.f1);
  CHECK(r1.steps.f1 == r2.steps.f1);
  CHECK(r1.intermediates.f1 == r2.intermediates.f1);
  CHECK(r1.overall_allcorrect == r2.overall_allcorrect);
}

TEST_CASE("steps allcorrect implies leaves allcorrect on trees") {
  Rng rng(101);
  int checked = 0;
  for (int iter = 0; iter < 200; ++iter) {
    EnvConfig cfg;
    cfg.n_gold_leaves = 3;
    cfg.n_distractors = 2;
    const Task task = generate_task(cfg, rng);
    const Trajectory traj =
        random_trajectory(task, 1 + static_cast<int>(rng.below(3)), rng);
    if (traj.size() < 2) continue;
    const auto rec = reconstruct_proof(traj, task.mode);
    const auto report = score_pair(rec.dag, task.gold, exact_content_match());
    if (report.steps.allcorrect) {
      CHECK(report.leaves.allcorrect);
      ++checked;
    }
  }
  // The gold replay below guarantees at least one positive instance.
  EnvConfig cfg;
  cfg.n_gold_leaves = 3;
  const Task task = generate_task(cfg, rng);
  const auto report = score_pair(task.gold, task.gold, exact_content_match());
  CHECK(report.steps.allcorrect);
  CHECK(report.leaves.allcorrect);
}
