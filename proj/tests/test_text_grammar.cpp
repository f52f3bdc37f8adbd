#include <doctest.h>

#include "common.hpp"
#include "skillgym/grammar.hpp"
#include "skillgym/text.hpp"

using namespace skillgym;

TEST_CASE("text helpers") {
  CHECK(text::to_lower("Boil WATER") == "boil water");
  CHECK(text::trim("  pot \t") == "pot");
  CHECK(text::split_words("  take   the pot ") == std::vector<std::string>{"take", "the", "pot"});
  CHECK(text::split("a| b ||c", '|') == std::vector<std::string>{"a", "b", "", "c"});
  CHECK(text::join({"a", "b", "c"}, ", ") == "a, b, c");
  CHECK(text::starts_with_ci("Task Sequence:", "task sequence"));
  CHECK(text::tokenize("You see a Pot, and a STOVE.") ==
        std::vector<std::string>{"you", "see", "a", "pot", "and", "a", "stove"});
  CHECK(text::slugify("Cooking Pasta!") == "cooking_pasta");
  CHECK(text::slugify("  make   a cup of tea ") == "make_a_cup_of_tea");
}

TEST_CASE("fnv1a64 matches published vectors") {
  CHECK(text::fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(text::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(text::hex64(0xaf63dc4c8601ec8cULL) == "af63dc4c8601ec8c");
}

TEST_CASE("templates split into words and slots") {
  auto parts = parse_template("fill <container> with water");
  REQUIRE(parts.size() == 4);
  CHECK(parts[1].is_slot);
  CHECK(parts[1].text == "container");
  CHECK(parts[1].kind == "container");
  CHECK(parts[3].text == "water");
  CHECK(template_slots("pour <portable> into <container>").size() == 2);
  CHECK_THROWS_AS(parse_template("fill <container with water"), std::invalid_argument);
}

TEST_CASE("command parsing") {
  const auto spec = testdata::pasta();
  SUBCASE("single noun, articles dropped") {
    auto c = parse_command_text("take the pot", spec);
    CHECK(c.verb == "take");
    CHECK(c.noun == "pot");
    CHECK_FALSE(c.second_noun);
  }
  SUBCASE("two nouns") {
    auto c = parse_command_text("put pasta in pot", spec);
    CHECK(c.verb == "put-in");  // the enabled default verb; the preposition is kept too
    CHECK(c.noun == "pasta");
    CHECK(c.preposition == "in");
    CHECK(c.second_noun == "pot");
  }
  SUBCASE("custom template") {
    auto c = parse_command_text("Fill the pot with water", spec);
    CHECK(c.verb == "fill");
    CHECK(c.slots.at("container") == "pot");
    CHECK(render_command(c, spec) == "fill pot with water");
  }
  SUBCASE("multiword names") {
    auto c = parse_command_text("examine recipe card", spec);
    CHECK(c.noun == "recipe card");
  }
  SUBCASE("unknown verb") {
    try {
      parse_command_text("frobnicate pot", spec);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.kind() == ParseErrorKind::unknown_verb);
      CHECK(e.phrase() == "frobnicate");
    }
  }
  SUBCASE("unknown noun") {
    try {
      parse_command_text("take spaceship", spec);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.kind() == ParseErrorKind::unresolved_noun);
    }
  }
  SUBCASE("second noun implies a preposition") {
    for (const char* t : {"put pasta in pot", "put pasta on counter", "turn on stove", "take pot"}) {
      auto c = parse_command_text(t, spec);
      CHECK(!c.verb.empty());
      if (c.second_noun) CHECK(c.preposition);
    }
  }
}

TEST_CASE("render inverts parse for canonical commands") {
  const auto spec = testdata::pasta();
  for (const char* t : {"take pot", "put pasta in pot", "put pasta on counter", "turn on stove", "open cabinet",
                        "boil water in pot", "look", "inventory"}) {
    CAPTURE(t);
    CHECK(render_command(parse_command_text(t, spec), spec) == t);
  }
}

TEST_CASE("compiled grammar agrees with the one-shot parser") {
  const auto spec = testdata::pasta();
  CommandGrammar g(spec);
  for (const char* t : {"take the pot", "put pasta in pot", "fill pot with water", "turn off stove"})
    CHECK(g.parse(t) == parse_command_text(t, spec));
}
