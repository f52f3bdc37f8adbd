#include <doctest.h>

#include <json.hpp>
#include <random>
#include <set>

#include "common.hpp"
#include "skillgym/experiments.hpp"
#include "skillgym/validator.hpp"

using namespace skillgym;
using namespace skillgym::experiments;
namespace fs = std::filesystem;

namespace {

const std::vector<GamePtr>& corpus() {
  static const auto games = load_corpus(testdata::kData / "games");
  return games;
}

// Small network so the training cases stay fast.
ExperimentPlan small_plan() {
  ExperimentPlan p;
  p.dims = {8, 8, 16, 16};
  p.max_steps = 20;
  p.repeats = 1;
  p.episodes = 2;
  return p;
}

std::vector<GamePtr> first(std::size_t n) { return {corpus().begin(), corpus().begin() + static_cast<long>(n)}; }

std::vector<std::pair<double, int>> outcomes(const std::vector<CurvePoint>& c) {
  std::vector<std::pair<double, int>> out;
  for (const auto& p : c) out.emplace_back(p.score, p.moves);
  return out;
}

std::vector<std::string> texts(const std::vector<GamePtr>& games) {
  std::vector<std::string> t;
  for (const auto& g : games)
    for (auto& s : agent::game_texts(g->spec())) t.push_back(std::move(s));
  return t;
}

fs::path scratch_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("skillgym_exp_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("plan bounds") {
  ExperimentPlan p;
  CHECK_NOTHROW(p.check());
  for (double f : {0.0, 1.0, -0.5, 1.5}) {
    auto q = p;
    q.train_fraction = f;
    CHECK_THROWS_AS(q.check(), std::invalid_argument);
  }
  auto q = p;
  q.repeats = 0;
  CHECK_THROWS_AS(q.check(), std::invalid_argument);
  q = p;
  q.episodes = -1;
  CHECK_THROWS_AS(q.check(), std::invalid_argument);
  q = p;
  q.max_steps = 0;
  CHECK_THROWS_AS(q.check(), std::invalid_argument);
  q = p;
  q.smoothing = 0;
  CHECK_THROWS_AS(q.check(), std::invalid_argument);
  CHECK(agent_kind_from("pretrained") == AgentKind::pretrained);
  CHECK_FALSE(agent_kind_from("oracle").has_value());
}

TEST_CASE("corpus loading and selection") {
  const auto& games = corpus();
  REQUIRE(games.size() >= 20);
  for (std::size_t i = 1; i < games.size(); ++i) CHECK(games[i - 1]->spec().id < games[i]->spec().id);
  auto picked = select(games, {"making_tea", "cooking_pasta"});
  REQUIRE(picked.size() == 2);
  CHECK(picked[0]->spec().id == "making_tea");
  CHECK(picked[1]->spec().id == "cooking_pasta");
  CHECK_THROWS_AS(select(games, {"no_such_game"}), std::invalid_argument);
}

TEST_CASE("id lists") {
  auto ids = read_id_list(testdata::kData / "suites" / "train10.txt");
  CHECK(ids.size() == 10);
  CHECK_NOTHROW(select(corpus(), ids));

  auto d = scratch_dir("ids");
  fs::create_directories(d);
  std::ofstream(d / "list.txt") << "# comment\n\n  making_tea  \nfrying_egg\n   \n# tail\n";
  CHECK(read_id_list(d / "list.txt") == std::vector<std::string>{"making_tea", "frying_egg"});
  CHECK_THROWS(read_id_list(d / "missing.txt"));
  fs::remove_all(d);
}

TEST_CASE("seeded split") {
  const auto& games = corpus();
  auto plan = small_plan();
  auto a = split_corpus(games, plan);
  auto b = split_corpus(games, plan);
  CHECK(a.train.size() + a.eval.size() == games.size());
  CHECK(a.train.size() == static_cast<std::size_t>(std::lround(0.75 * static_cast<double>(games.size()))));
  std::set<std::string> seen;
  for (const auto& g : a.train) seen.insert(g->spec().id);
  for (const auto& g : a.eval) CHECK(seen.insert(g->spec().id).second);
  CHECK(seen.size() == games.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) CHECK(a.train[i] == b.train[i]);

  plan.train_fraction = 0.01;
  auto tiny = split_corpus(games, plan);
  CHECK(tiny.train.size() == 1);
  plan.train_fraction = 0.99;
  CHECK(split_corpus(games, plan).eval.size() == 1);

  plan.train_ids = {"making_tea"};
  plan.eval_ids = {"frying_egg", "cooking_pasta"};
  auto fixed = split_corpus(games, plan);
  REQUIRE(fixed.train.size() == 1);
  REQUIRE(fixed.eval.size() == 2);
  CHECK(fixed.eval[1]->spec().id == "cooking_pasta");
}

TEST_CASE("curve helpers") {
  CHECK(smooth({}, 5).empty());
  CHECK(smooth({1, 2, 3}, 1) == std::vector<double>{1, 2, 3});
  auto s = smooth({0, 1, 1, 1, 1, 1}, 2);
  CHECK(s == std::vector<double>{0, 0.5, 1, 1, 1, 1});
  auto w = smooth({3, 0, 0, 0, 6}, 3);
  CHECK(w[0] == doctest::Approx(3));
  CHECK(w[1] == doctest::Approx(1.5));
  CHECK(w[2] == doctest::Approx(1));
  CHECK(w[3] == doctest::Approx(0));
  CHECK(w[4] == doctest::Approx(2));

  std::vector<CurvePoint> c;
  // Two games per episode; means 0.25, 0.5, 1.0.
  for (auto [ep, a, b] : {std::tuple{1, 0.0, 0.5}, std::tuple{2, 0.5, 0.5}, std::tuple{3, 1.0, 1.0}}) {
    c.push_back({ep, "x", "g1", a, 3});
    c.push_back({ep, "x", "g2", b, 3});
  }
  CHECK(episode_means(c) == std::vector<double>{0.25, 0.5, 1.0});
  CHECK(episodes_to_threshold(c, 0.5, 1) == 2);
  CHECK(episodes_to_threshold(c, 0.5, 2) == 3);  // smoothed: .25 .375 .75
  CHECK_FALSE(episodes_to_threshold(c, 0.9, 2).has_value());
  CHECK_FALSE(episodes_to_threshold({}, 0.0, 5).has_value());
}

TEST_CASE("random evaluation bounds") {
  auto plan = small_plan();
  plan.repeats = 3;
  RandomPolicy rnd;
  auto games = first(6);
  auto a = evaluate(rnd, games, plan, "random");
  auto b = evaluate(rnd, games, plan, "random");
  CHECK(a.curve.size() == games.size() * 3);
  CHECK(outcomes(a.curve) == outcomes(b.curve));
  CHECK(a.mean_score == b.mean_score);
  CHECK(a.mean_score >= 0);
  CHECK(a.mean_score <= 1);
  CHECK(a.std_score >= 0);
  for (const auto& p : a.curve) {
    CHECK(p.score >= 0);
    CHECK(p.score <= 1);
    CHECK(p.moves <= plan.max_steps);
    if (p.score < 1) CHECK(p.moves == plan.max_steps);
  }
  REQUIRE(a.per_game.size() == games.size());
  for (std::size_t i = 0; i < games.size(); ++i) CHECK(a.per_game[i].game == games[i]->spec().id);
}

TEST_CASE("single step budget") {
  auto plan = small_plan();
  plan.max_steps = 1;
  RandomPolicy rnd;
  auto e = evaluate(rnd, first(4), plan, "random");
  CHECK(e.mean_moves == 1);
  CHECK(e.mean_score < 1);
}

TEST_CASE("oracle evaluation is a ceiling") {
  auto plan = small_plan();
  plan.repeats = 2;
  OraclePolicy oracle;
  auto games = corpus();
  auto e = evaluate(oracle, games, plan, "oracle");
  CHECK(e.mean_score == doctest::Approx(1.0));
  CHECK(e.std_score == doctest::Approx(0.0));
  for (std::size_t i = 0; i < games.size(); ++i)
    CHECK(e.per_game[i].moves == doctest::Approx(*validator::explore(*games[i]).min_steps));
}

TEST_CASE("pretraining without episodes") {
  auto plan = small_plan();
  plan.episodes = 0;
  auto games = first(3);
  auto r = pretrain(games, plan);
  CHECK(r.curve.empty());
  agent::Agent fresh(corpus_vocab(games), plan.dims, plan.seed);
  CHECK(r.agent.params().flat() == fresh.params().flat());
}

TEST_CASE("pretraining is deterministic") {
  auto plan = small_plan();
  auto games = first(3);
  auto a = pretrain(games, plan);
  auto b = pretrain(games, plan);
  REQUIRE(a.curve.size() == 2 * games.size());
  CHECK(a.agent.params().flat() == b.agent.params().flat());
  CHECK(curves_csv(a.curve) == curves_csv(b.curve));
  agent::Agent init(corpus_vocab(games), plan.dims, plan.seed);
  CHECK(a.agent.params().flat() != init.params().flat());
  for (const auto& p : a.curve) {
    CHECK(p.agent == "pretrained");
    CHECK(p.episode >= 1);
    CHECK(p.episode <= plan.episodes);
  }

  auto d = scratch_dir("ckpt");
  fs::create_directories(d);
  agent::save_params(d / "a.bin", a.agent.params(), a.agent.vocab());
  agent::save_params(d / "b.bin", b.agent.params(), b.agent.vocab());
  CHECK(testdata::slurp(d / "a.bin") == testdata::slurp(d / "b.bin"));
  fs::remove_all(d);

  plan.seed = 2;
  CHECK(pretrain(games, plan).agent.params().flat() != a.agent.params().flat());
}

TEST_CASE("transfer control with identical starting points") {
  auto plan = small_plan();
  auto targets = first(2);
  // Same vocabulary, dims and seed as the fresh arm builds for itself.
  agent::Agent same(agent::Vocab::build(texts(targets)), plan.dims, plan.seed);
  auto rep = compare_transfer(same, targets, plan);
  CHECK(outcomes(rep.fresh.curve) == outcomes(rep.pretrained.curve));
  CHECK(rep.fresh.final_scores == rep.pretrained.final_scores);
  CHECK(rep.fresh.mean_episodes == rep.pretrained.mean_episodes);
  CHECK(rep.episode_ratio == doctest::Approx(1.0));
  for (const auto& p : rep.fresh.curve) CHECK(p.agent == "fresh");
  for (const auto& p : rep.pretrained.curve) CHECK(p.agent == "pretrained");
}

TEST_CASE("transfer with no fine-tuning budget") {
  auto plan = small_plan();
  plan.episodes = 0;
  plan.repeats = 2;
  auto targets = first(2);
  auto pre = pretrain(first(3), small_plan());
  auto rep = compare_transfer(pre.agent, targets, plan);
  for (auto* arm : {&rep.fresh, &rep.pretrained}) {
    CHECK(arm->curve.empty());
    REQUIRE(arm->episodes_to_threshold.size() == 2);
    CHECK_FALSE(arm->episodes_to_threshold[0].has_value());
    CHECK(arm->mean_episodes == 1);  // unreached counts as episodes + 1
    REQUIRE(arm->final_scores.size() == 2);
    for (double s : arm->final_scores) {
      CHECK(s >= 0);
      CHECK(s <= 1);
    }
  }
  CHECK(rep.episode_ratio == doctest::Approx(1.0));
  // The checkpoint passed in is not modified.
  auto again = pretrain(first(3), small_plan());
  CHECK(pre.agent.params().flat() == again.agent.params().flat());
}

TEST_CASE("results files") {
  auto plan = small_plan();
  RunOutput out;
  RandomPolicy rnd;
  out.evaluations.push_back(evaluate(rnd, first(2), plan, "random"));
  out.curves = out.evaluations[0].curve;
  TransferReport t;
  t.fresh.agent = "fresh";
  t.pretrained.agent = "pretrained";
  t.fresh.episodes_to_threshold = {4};
  t.pretrained.episodes_to_threshold = {std::nullopt};
  t.episode_ratio = 0.25;
  out.transfer = t;

  auto d = scratch_dir("results");
  write_results(d, plan, out);
  auto csv = testdata::slurp(d / "curves.csv");
  CHECK(csv.rfind("episode,agent,game,score,moves\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(out.curves.size() + 1));
  auto j = nlohmann::json::parse(testdata::slurp(d / "summary.json"));
  CHECK(j["plan"]["max_steps"] == plan.max_steps);
  CHECK(j["plan"]["eval_mode"] == "sample");
  REQUIRE(j["evaluations"].size() == 1);
  CHECK(j["evaluations"][0]["agent"] == "random");
  CHECK(j["evaluations"][0]["per_game"].size() == 2);
  CHECK(j["transfer"]["fresh"]["episodes_to_threshold"][0] == 4);
  CHECK(j["transfer"]["pretrained"]["episodes_to_threshold"][0].is_null());
  CHECK(j["transfer"]["episode_ratio"] == 0.25);
  fs::remove_all(d);
}
