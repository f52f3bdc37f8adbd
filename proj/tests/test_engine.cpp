#include <doctest.h>

#include <algorithm>
#include <json.hpp>
#include <random>
#include <sstream>

#include "common.hpp"
#include "skillgym/engine.hpp"
#include "skillgym/grammar.hpp"
#include "skillgym/text.hpp"
#include "skillgym/validator.hpp"

using namespace skillgym;
using engine::Game;
using engine::WorldState;
using json = nlohmann::json;

namespace {

std::size_t idx(const Game& g, const std::string& name) { return *g.spec().entity_index(name); }

engine::StepResult play(const Game& g, WorldState& s, const std::string& text) {
  auto [next, res] = g.step(s, g.parse(text, s));
  s = std::move(next);
  return res;
}

int collected_value(const Game& g, const WorldState& s) {
  int total = 0;
  for (std::size_t r = 0; r < g.spec().rewards.size(); ++r)
    if ((s.collected_rewards >> r) & 1U) total += g.spec().rewards[r].value;
  return total;
}

// Checks the state invariants that hold after every step.
void check_state(const Game& g, const WorldState& s) {
  CHECK(s.score == collected_value(g, s));
  for (std::size_t i = 0; i < s.entities.size(); ++i)
    if (s.entities[i].location.kind == engine::Location::Kind::inventory) CHECK(g.spec().entities[i].carryable());
  if (s.done && !s.failed) {
    const auto all = g.spec().rewards.size() == 64 ? ~0ULL : (1ULL << g.spec().rewards.size()) - 1;
    CHECK(s.collected_rewards == all);
  }
}

std::vector<std::filesystem::path> corpus_files() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(testdata::kData / "games"))
    if (e.path().string().ends_with(".game.json")) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("initial cooking pasta state") {
  const Game g(testdata::pasta());
  const auto s = g.initial_state(7);
  const auto pot = s.entities[idx(g, "pot")].location;
  CHECK(pot.kind == engine::Location::Kind::in);
  CHECK(pot.ref == idx(g, "cabinet"));
  CHECK(s.score == 0);
  CHECK(s.moves == 0);
  CHECK_FALSE(s.done);
  CHECK(g.initial_state(7) == s);
  CHECK(g.max_score() == 6);
  const auto intro = g.intro(s);
  CHECK(intro.room_description.find("cabinet") != std::string::npos);
  CHECK_FALSE(intro.done);
}

TEST_CASE("admissible commands") {
  const Game g(testdata::pasta());
  auto s = g.initial_state();
  const auto adm = g.admissible_commands(s);
  CHECK(std::find(adm.begin(), adm.end(), "open cabinet") != adm.end());
  // The pot is inside a closed cabinet and cannot be seen yet.
  CHECK(std::find(adm.begin(), adm.end(), "take pot") == adm.end());
  CHECK(std::is_sorted(adm.begin(), adm.end()));
  CHECK(std::adjacent_find(adm.begin(), adm.end()) == adm.end());
  play(g, s, "open cabinet");
  const auto after = g.admissible_commands(s);
  CHECK(std::find(after.begin(), after.end(), "take pot") != after.end());
}

TEST_CASE("cooking pasta walkthrough") {
  const Game g(testdata::pasta());
  auto s = g.initial_state();
  int total = 0;
  for (std::size_t i = 0; i < testdata::kPastaWalkthrough.size(); ++i) {
    const auto res = play(g, s, testdata::kPastaWalkthrough[i]);
    CAPTURE(testdata::kPastaWalkthrough[i]);
    CHECK(res.score_delta == 1);
    total += res.score_delta;
    CHECK(res.done == (i + 1 == testdata::kPastaWalkthrough.size()));
    check_state(g, s);
  }
  CHECK(total == g.max_score());
  CHECK(s.score == g.max_score());
  CHECK(s.moves == 6);
  CHECK(s.won());
  CHECK(g.admissible_commands(s).empty());
  CHECK_THROWS_AS(g.step(s, g.parse("look", s)), engine::EpisodeFinished);
}

TEST_CASE("unmet preconditions cost a move and nothing else") {
  const Game g(testdata::pasta());
  auto s = g.initial_state();
  play(g, s, "open cabinet");
  play(g, s, "take pot");
  const auto before = s;
  const auto res = play(g, s, "boil water in pot");
  CHECK(res.feedback == "There is no water in the pot to boil.");
  CHECK(res.score_delta == 0);
  CHECK(s.moves == before.moves + 1);
  auto same = s;
  same.moves = before.moves;
  CHECK(same == before);
}

TEST_CASE("built-in verbs respect containers and switches") {
  const Game g(testdata::pasta());
  auto s = g.initial_state();
  CHECK(play(g, s, "take stove").score_delta == 0);
  CHECK_FALSE(g.held(s, idx(g, "stove")));
  play(g, s, "turn on stove");
  CHECK(g.has_flag(s, idx(g, "stove"), "on"));
  CHECK_FALSE(g.has_flag(s, idx(g, "stove"), "off"));
  play(g, s, "open cabinet");
  play(g, s, "take pot");
  play(g, s, "close cabinet");
  CHECK(play(g, s, "put pot in cabinet").feedback == "The cabinet is closed.");
  play(g, s, "take pasta");
  play(g, s, "put pasta on chair");
  CHECK(s.entities[idx(g, "pasta")].location.kind == engine::Location::Kind::on);
  CHECK(play(g, s, "put pot in pot").feedback == "You can't put the pot inside itself.");
}

TEST_CASE("held entities win noun ties; otherwise ties are ambiguous") {
  auto j = json::parse(testdata::kCoin);
  j["entities"].push_back({{"name", "red apple"}, {"kind", "portable"}, {"location", "street"}, {"properties", json::object()}, {"description", "Red."}});
  j["entities"].push_back({{"name", "green apple"}, {"kind", "portable"}, {"location", "street"}, {"properties", json::object()}, {"description", "Green."}});
  const Game g(parse_spec(j.dump()));
  auto s = g.initial_state();
  try {
    g.parse("take apple", s);
    FAIL("expected an ambiguity");
  } catch (const ParseError& e) {
    CHECK(e.kind() == ParseErrorKind::ambiguous_noun);
  }
  play(g, s, "take red apple");
  CHECK(g.parse("drop apple", s).noun == "red apple");
}

TEST_CASE("fatal actions end the episode with a penalty") {
  auto j = json::parse(testdata::kCoin);
  j["actions"]["custom"].push_back({{"name", "jump"}, {"template", "jump into <object>"},
                                    {"preconditions", json::array({{{"subject", "<object>"}, {"relation", "in_location"}, {"argument", "street"}}})},
                                    {"effects", json::array()}, {"success", "Splash."}, {"failure", "No."},
                                    {"fatal", true}, {"penalty", 2}});
  const Game g(parse_spec(j.dump()));
  auto s = g.initial_state();
  const auto res = play(g, s, "jump into coin");
  CHECK(res.done);
  CHECK_FALSE(res.won);
  CHECK(res.score_delta == -2);
  CHECK(s.failed);
  // Score stays the reward sum; the penalty is kept apart.
  CHECK(s.score == 0);
  CHECK(s.penalty == 2);
  check_state(g, s);
}

TEST_CASE("every admissible command parses back to itself") {
  const Game g(testdata::pasta());
  std::mt19937_64 rng(3);
  auto s = g.initial_state();
  for (int step = 0; step < 200 && !s.done; ++step) {
    const auto cands = g.candidates(s);
    for (const auto& c : cands) {
      CAPTURE(c.text);
      CHECK(g.parse(c.text, s) == c.command);
      CHECK(render_command(c.command, g.spec()) == c.text);
    }
    const auto& pick = cands[std::uniform_int_distribution<std::size_t>(0, cands.size() - 1)(rng)];
    s = g.advance(s, pick.command);
  }
}

TEST_CASE("random play keeps the state invariants") {
  for (const auto& f : corpus_files()) {
    CAPTURE(f.filename().string());
    const Game g(load_spec_file(f.string()));
    std::mt19937_64 rng(11);
    for (int episode = 0; episode < 20; ++episode) {
      auto s = g.initial_state();
      std::vector<std::string> cmds;
      std::vector<int> fired(g.spec().rewards.size());
      while (!s.done && s.moves < 60) {
        const auto adm = g.admissible_commands(s);
        const auto& cmd = adm[std::uniform_int_distribution<std::size_t>(0, adm.size() - 1)(rng)];
        const auto prev = s;
        auto [next, res] = g.step(s, g.parse(cmd, s));
        s = std::move(next);
        cmds.push_back(cmd);
        CHECK(s.moves == prev.moves + 1);
        CHECK(s.score >= prev.score);
        CHECK(res.score_delta == s.score - prev.score);
        CHECK((prev.collected_rewards & ~s.collected_rewards) == 0);
        check_state(g, s);
      }
      CHECK(g.state_hash(engine::replay(g, cmds)) == g.state_hash(s));
      CHECK(engine::replay(g, cmds) == s);
    }
  }
}

TEST_CASE("task graph linearizations win") {
  std::mt19937_64 rng(5);
  for (const auto& f : corpus_files()) {
    CAPTURE(f.filename().string());
    const Game g(load_spec_file(f.string()));
    const auto& tg = g.spec().task_graph;
    for (int trial = 0; trial < 10; ++trial) {
      // Random topological order.
      std::vector<std::string> order, left = tg.nodes;
      while (!left.empty()) {
        std::vector<std::size_t> ready;
        for (std::size_t i = 0; i < left.size(); ++i) {
          const bool blocked = std::any_of(tg.edges.begin(), tg.edges.end(), [&](const auto& e) {
            return e.second == left[i] && std::find(left.begin(), left.end(), e.first) != left.end();
          });
          if (!blocked) ready.push_back(i);
        }
        REQUIRE_FALSE(ready.empty());
        const auto pick = ready[std::uniform_int_distribution<std::size_t>(0, ready.size() - 1)(rng)];
        order.push_back(left[pick]);
        left.erase(left.begin() + static_cast<std::ptrdiff_t>(pick));
      }
      const auto end = engine::replay(g, order);
      CAPTURE(text::join(order, "; "));
      CHECK(end.won());
      CHECK(end.score == g.max_score());
    }
  }
}

TEST_CASE("transcripts round-trip through json lines") {
  const Game g(testdata::pasta());
  auto s = g.initial_state();
  std::vector<engine::TranscriptRecord> recs;
  for (const auto& c : testdata::kPastaWalkthrough) {
    const auto res = play(g, s, c);
    recs.push_back({s.moves, c, res.feedback, s.score, s.done});
  }
  std::stringstream io;
  engine::write_transcript(io, recs);
  CHECK(engine::read_transcript(io) == recs);
  CHECK(engine::to_jsonl(recs[0]).find("\"command\":\"open cabinet\"") != std::string::npos);
}

TEST_CASE("replay counts unparseable commands as moves") {
  const Game g(testdata::pasta());
  const auto s = engine::replay(g, {"xyzzy", "open cabinet"});
  CHECK(s.moves == 2);
  CHECK(s.score == 1);
}

TEST_CASE("state keys ignore moves") {
  const Game g(testdata::pasta());
  auto a = g.initial_state();
  auto b = a;
  play(g, b, "look");
  CHECK(g.state_key(a) == g.state_key(b));
  play(g, b, "open cabinet");
  CHECK(g.state_key(a) != g.state_key(b));
}
