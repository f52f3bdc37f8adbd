#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "skillgym/engine.hpp"
#include "skillgym/gamespec.hpp"

namespace testdata {

inline const std::filesystem::path kData = SKILLGYM_DATA_DIR;

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string pasta_json() { return slurp(kData / "games" / "cooking_pasta.game.json"); }
inline skillgym::GameSpec pasta() { return skillgym::parse_spec(pasta_json()); }
inline std::shared_ptr<const skillgym::engine::Game> pasta_game() {
  return std::make_shared<const skillgym::engine::Game>(pasta());
}

inline const std::vector<std::string> kPastaWalkthrough = {
    "open cabinet", "take pot", "fill pot with water", "boil water in pot", "take pasta", "put pasta in pot"};

// Key on the floor, locked box. Rewards for taking the key and unlocking.
inline constexpr const char* kKeyBox = R"({
  "id": "key_box", "title": "Key box", "goal": "Unlock the box.",
  "rooms": [{"name": "hall", "description": "A bare hall."}],
  "entities": [
    {"name": "key", "kind": "portable", "location": "hall", "properties": {}, "description": "A key."},
    {"name": "box", "kind": "fixture", "location": "hall", "properties": {"locked": true}, "description": "A box."}
  ],
  "actions": {
    "default": ["take", "drop"],
    "custom": [
      {"name": "unlock", "template": "unlock <fixture>",
       "preconditions": [{"subject": "key", "relation": "in_inventory"}, {"subject": "<fixture>", "relation": "has_flag", "argument": "locked"}],
       "effects": [{"op": "clear", "subject": "<fixture>", "flag": "locked"}],
       "success": "Click.", "failure": "You need the key."}
    ]
  },
  "rewards": [
    {"trigger": {"subject": "key", "relation": "in_inventory"}, "value": 1},
    {"trigger": {"subject": "box", "relation": "has_flag", "argument": "locked", "negated": true}, "value": 1}
  ],
  "task_graph": {"nodes": ["take key", "unlock box"], "edges": [["take key", "unlock box"]]},
  "max_steps": 10
})";

// One reward for taking a coin.
inline constexpr const char* kCoin = R"({
  "id": "coin", "title": "Coin", "goal": "Pick up the coin.",
  "rooms": [{"name": "street", "description": "A wet street."}],
  "entities": [{"name": "coin", "kind": "portable", "location": "street", "properties": {}, "description": "A coin."}],
  "actions": {"default": ["look", "take", "drop"], "custom": []},
  "rewards": [{"trigger": {"subject": "coin", "relation": "in_inventory"}, "value": 1}],
  "task_graph": {"nodes": ["take coin"]},
  "max_steps": 10
})";

}  // namespace testdata
