#include <doctest.h>

#include <json.hpp>
#include <random>

#include "common.hpp"
#include "skillgym/rlenv.hpp"

using namespace skillgym;
using rlenv::Environment;
using json = nlohmann::json;

TEST_CASE("reset") {
  Environment env(testdata::pasta_game());
  const auto first = env.reset(7);
  for (const char* fixture : {"cabinet", "stove", "counter"})
    CHECK(first.observation.room_description.find(fixture) != std::string::npos);
  CHECK(first.info.score == 0);
  CHECK(first.info.moves == 0);
  CHECK(first.info.max_score == 6);
  CHECK_FALSE(first.done);
  CHECK(first.reward == 0);
  CHECK(first.observation.admissible_commands == env.game().admissible_commands(env.state()));
  env.step("open cabinet");
  CHECK(env.reset(7) == first);
}

TEST_CASE("step before reset is refused") {
  Environment env(testdata::pasta_game());
  CHECK_THROWS_AS(env.step("look"), engine::EpisodeFinished);
}

TEST_CASE("step cap ends the episode without a win") {
  Environment env(testdata::pasta_game(), {50});
  env.reset();
  rlenv::EnvStep s;
  for (int i = 0; i < 50; ++i) {
    CHECK_FALSE(env.done());
    s = env.step("look");
  }
  CHECK(s.done);
  CHECK_FALSE(s.info.won);
  CHECK(s.info.moves == 50);
  CHECK(s.observation.admissible_commands.empty());
  CHECK_THROWS_AS(env.step("look"), engine::EpisodeFinished);
}

TEST_CASE("winning step") {
  Environment env(testdata::pasta_game());
  env.reset();
  rlenv::EnvStep s;
  for (const auto& c : testdata::kPastaWalkthrough) s = env.step(c);
  CHECK(s.done);
  CHECK(s.info.won);
  CHECK(s.reward >= 1);
  CHECK(env.normalized_score() == 1.0);
}

TEST_CASE("unparseable input") {
  Environment env(testdata::pasta_game());
  env.reset();
  const auto s = env.step("xyzzy");
  CHECK(s.reward == 0);
  CHECK(s.observation.feedback == rlenv::kUnparsedFeedback);
  CHECK(s.info.moves == 1);
  CHECK(env.step("frobnicate pot").observation.feedback == rlenv::kUnparsedFeedback);
}

TEST_CASE("free text reaches the parser") {
  Environment env(testdata::pasta_game());
  env.reset();
  const auto s = env.step("Open the Cabinet");
  CHECK(s.reward == 1);
}

TEST_CASE("normalized score") {
  auto j = json::parse(testdata::kCoin);
  j["rewards"][0]["value"] = 5;
  Environment env(std::make_shared<const engine::Game>(parse_spec(j.dump())));
  env.reset();
  CHECK(env.normalized_score() == 0.0);
  env.step("take coin");
  CHECK(env.state().score == 5);
  CHECK(env.normalized_score() == 1.0);
}

TEST_CASE("failure penalty switch") {
  auto j = json::parse(testdata::kCoin);
  j["actions"]["custom"].push_back({{"name", "jump"}, {"template", "jump over <object>"},
                                    {"preconditions", json::array({{{"subject", "<object>"}, {"relation", "in_location"}, {"argument", "street"}}})},
                                    {"effects", json::array()}, {"success", "Oops."}, {"failure", "No."},
                                    {"fatal", true}, {"penalty", 3}});
  auto game = std::make_shared<const engine::Game>(parse_spec(j.dump()));
  Environment with(game), without(game, {50, false});
  with.reset();
  without.reset();
  const auto a = with.step("jump over coin");
  const auto b = without.step("jump over coin");
  CHECK(a.done);
  CHECK(b.done);
  CHECK(a.reward == -3);
  CHECK(b.reward == 0);
  CHECK_FALSE(a.info.won);
}

TEST_CASE("interleaved environments match isolated ones") {
  auto game = testdata::pasta_game();
  std::mt19937_64 rng(9);
  std::vector<std::string> actions;
  {
    Environment env(game);
    auto s = env.reset();
    while (!s.done) {
      const auto& adm = s.observation.admissible_commands;
      actions.push_back(adm[std::uniform_int_distribution<std::size_t>(0, adm.size() - 1)(rng)]);
      s = env.step(actions.back());
    }
  }
  std::vector<rlenv::EnvStep> alone, mixed;
  Environment solo(game);
  solo.reset(3);
  for (const auto& a : actions) alone.push_back(solo.step(a));
  // Three environments sharing one game, stepped round-robin.
  std::vector<Environment> batch(3, Environment(game));
  for (auto& e : batch) e.reset(3);
  for (const auto& a : actions)
    for (std::size_t k = 0; k < batch.size(); ++k) {
      auto s = batch[k].step(a);
      if (k == 1) mixed.push_back(std::move(s));
    }
  CHECK(alone == mixed);
}

TEST_CASE("episode metrics line") {
  rlenv::EpisodeMetrics m{"cooking_pasta", 3, 4, 4.0 / 6, 50, false};
  const auto j = json::parse(rlenv::to_jsonl(m));
  CHECK(j["game_id"] == "cooking_pasta");
  CHECK(j["episode"] == 3);
  CHECK(j["moves"] == 50);
  CHECK(j["won"] == false);
  CHECK(rlenv::to_jsonl(m).find('\n') == std::string::npos);
}
