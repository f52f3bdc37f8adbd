#include <doctest.h>

#include <algorithm>
#include <json.hpp>
#include <random>
#include <regex>

#include "common.hpp"
#include "skillgym/engine.hpp"
#include "skillgym/gamespec.hpp"
#include "skillgym/validator.hpp"

using namespace skillgym;
using json = nlohmann::json;

namespace {

std::vector<Violation> violations_of(const std::string& text) {
  try {
    parse_spec(text);
    return {};
  } catch (const SpecError& e) {
    return e.violations();
  }
}

bool has_kind(const std::vector<Violation>& vs, ViolationKind k) {
  return std::any_of(vs.begin(), vs.end(), [k](const Violation& v) { return v.kind == k; });
}

std::vector<std::filesystem::path> bundled_specs() {
  std::vector<std::filesystem::path> out;
  for (const auto* sub : {"games", "transfer"})
    for (const auto& e : std::filesystem::directory_iterator(testdata::kData / sub))
      if (e.path().string().ends_with(".game.json")) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("cooking pasta task graph orders the cabinet before the pot") {
  const auto spec = testdata::pasta();
  const auto& nodes = spec.task_graph.nodes;
  CHECK(std::find(nodes.begin(), nodes.end(), "open cabinet") != nodes.end());
  CHECK(std::find(nodes.begin(), nodes.end(), "take pot") != nodes.end());
  const auto& edges = spec.task_graph.edges;
  CHECK(std::find(edges.begin(), edges.end(), std::pair<std::string, std::string>{"open cabinet", "take pot"}) !=
        edges.end());
  CHECK(validate_schema(spec).empty());
}

TEST_CASE("empty object is a schema violation") {
  const auto vs = violations_of("{}");
  REQUIRE_FALSE(vs.empty());
  CHECK(has_kind(vs, ViolationKind::schema));
}

TEST_CASE("malformed json") {
  CHECK(has_kind(violations_of("{\"id\": "), ViolationKind::malformed_json));
}

TEST_CASE("reward on an undeclared entity dangles") {
  auto j = json::parse(testdata::pasta_json());
  j["rewards"][0]["trigger"] = {{"subject", "kettle"}, {"relation", "in_inventory"}};
  const auto vs = violations_of(j.dump());
  auto it = std::find_if(vs.begin(), vs.end(), [](const Violation& v) {
    return v.kind == ViolationKind::dangling_reference && v.name == "kettle";
  });
  CHECK(it != vs.end());
}

TEST_CASE("duplicate entity names, case-insensitively") {
  auto j = json::parse(testdata::pasta_json());
  auto dup = j["entities"][1];
  dup["name"] = "POT";
  dup["location"] = "kitchen";
  j["entities"].push_back(dup);
  CHECK(has_kind(violations_of(j.dump()), ViolationKind::uniqueness));
}

TEST_CASE("a container may not contain itself") {
  auto j = json::parse(testdata::pasta_json());
  j["entities"][1]["location"] = "in pot";
  CHECK(has_kind(violations_of(j.dump()), ViolationKind::self_containment));

  // Two-step cycle.
  j = json::parse(testdata::pasta_json());
  j["entities"][0]["location"] = "in pot";
  CHECK(has_kind(violations_of(j.dump()), ViolationKind::self_containment));
}

TEST_CASE("paired flags must be exclusive") {
  auto j = json::parse(testdata::pasta_json());
  j["entities"][0]["properties"]["open"] = true;  // cabinet is also closed
  CHECK(has_kind(violations_of(j.dump()), ViolationKind::flag_conflict));
  j = json::parse(testdata::pasta_json());
  j["entities"][4]["properties"].erase("off");  // switchable stove with neither
  CHECK(has_kind(violations_of(j.dump()), ViolationKind::flag_conflict));
}

TEST_CASE("spec without entities or rewards is rejected") {
  auto j = json::parse(testdata::pasta_json());
  j["entities"] = json::array();
  CHECK_FALSE(violations_of(j.dump()).empty());
  j = json::parse(testdata::pasta_json());
  j["rewards"] = json::array();
  CHECK_FALSE(violations_of(j.dump()).empty());
}

TEST_CASE("cyclic task graph") {
  auto j = json::parse(testdata::pasta_json());
  j["task_graph"]["edges"].push_back({"take pot", "open cabinet"});
  CHECK(has_kind(violations_of(j.dump()), ViolationKind::task_graph));
}

TEST_CASE("max_score sums reward values") {
  auto j = json::parse(testdata::kCoin);
  CHECK(max_score(parse_spec(j.dump())) == 1);
  auto r = j["rewards"][0];
  j["rewards"] = json::array();
  for (int v : {1, 1, 1, 2}) {
    auto copy = r;
    copy["value"] = v;
    j["rewards"].push_back(copy);
  }
  CHECK(max_score(parse_spec_unchecked(j.dump())) == 5);
}

TEST_CASE("names are stored lower-cased") {
  auto j = json::parse(testdata::kCoin);
  j["entities"][0]["name"] = "Coin";
  j["rewards"][0]["trigger"]["subject"] = "COIN";
  const auto spec = parse_spec(j.dump());
  CHECK(spec.entities[0].name == "coin");
  CHECK(spec.find_entity("CoIn") != nullptr);
}

TEST_CASE("every bundled spec validates and round-trips through serialize") {
  const auto files = bundled_specs();
  REQUIRE(files.size() >= 20);
  for (const auto& f : files) {
    CAPTURE(f.filename().string());
    const auto spec = load_spec_file(f.string());
    CHECK(validate_schema(spec).empty());
    const auto text = serialize_spec(spec);
    CHECK(parse_spec(text) == spec);
    CHECK(serialize_spec(parse_spec(text)) == text);
  }
}

TEST_CASE("mutated bundled specs are rejected") {
  std::mt19937_64 rng(7);
  for (const auto& f : bundled_specs()) {
    CAPTURE(f.filename().string());
    const auto base = json::parse(testdata::slurp(f));
    // Deleting any required top-level field.
    for (const char* key : {"id", "rooms", "entities", "actions", "rewards"}) {
      auto j = base;
      j.erase(key);
      CAPTURE(key);
      CHECK_FALSE(violations_of(j.dump()).empty());
    }
    // Deleting a required entity field.
    {
      auto j = base;
      const auto i = std::uniform_int_distribution<std::size_t>(0, j["entities"].size() - 1)(rng);
      j["entities"][i].erase(i % 2 ? "kind" : "location");
      CHECK_FALSE(violations_of(j.dump()).empty());
    }
    // Corrupting a name that rewards refer to.
    {
      auto j = base;
      auto& t = j["rewards"][0]["trigger"];
      if (t.contains("subject"))
        t["subject"] = t["subject"].get<std::string>() + "zq";
      else
        t["argument"] = t["argument"].get<std::string>() + "zq";
      CHECK_FALSE(violations_of(j.dump()).empty());
    }
    // Corrupting a holder name used by a location.
    {
      auto j = base;
      bool changed = false;
      for (auto& e : j["entities"]) {
        auto loc = e["location"].get<std::string>();
        if (loc.starts_with("in ") || loc.starts_with("on ")) {
          e["location"] = loc + "zq";
          changed = true;
          break;
        }
      }
      if (changed) CHECK(has_kind(violations_of(j.dump()), ViolationKind::dangling_reference));
    }
  }
}

TEST_CASE("max_score equals the score the engine can reach") {
  for (const auto& f : bundled_specs()) {
    CAPTURE(f.filename().string());
    const engine::Game game(load_spec_file(f.string()));
    const auto rep = validator::explore(game);
    REQUIRE(rep.winnable);
    const auto end = engine::replay(game, rep.solution);
    CHECK(end.score == max_score(game.spec()));
    CHECK(end.done);
  }
}

TEST_CASE("inform7 export") {
  const auto spec = testdata::pasta();
  const auto src = emit_inform7(spec);
  for (const auto& e : spec.entities) {
    CAPTURE(e.name);
    const std::regex decl("(^|\\n)The " + e.name + " is an? ");
    CHECK(std::distance(std::sregex_iterator(src.begin(), src.end(), decl), std::sregex_iterator()) == 1);
  }
  CHECK(src.find("The maximum score is 6.") != std::string::npos);
  CHECK(emit_inform7(testdata::pasta()) == src);
}

TEST_CASE("location strings") {
  CHECK(parse_location("kitchen").kind == LocationRef::Kind::room);
  auto in = parse_location("in cabinet");
  CHECK(in.kind == LocationRef::Kind::in);
  CHECK(in.target == "cabinet");
  auto on = parse_location("on spice rack");
  CHECK(on.kind == LocationRef::Kind::on);
  CHECK(on.target == "spice rack");
}

TEST_CASE("declared flags include custom effect flags") {
  const auto flags = declared_flags(testdata::pasta());
  CHECK(flags.count("boiling") == 1);
  CHECK(flags.count("open") == 1);
}
