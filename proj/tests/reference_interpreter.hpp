#pragma once

// Minimal second implementation of the game rules over plain GameSpec data
// (string-keyed state, no bitsets, no grammar). Used to cross-check
// the engine on small games.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "skillgym/engine.hpp"
#include "skillgym/gamespec.hpp"

namespace refint {

struct State {
  std::map<std::string, std::string> where;  // "room:<r>", "in:<e>", "on:<e>", "held", "gone"
  std::map<std::string, std::set<std::string>> flags;
  std::set<std::size_t> rewards;
  std::set<std::string> completed;
  int score = 0;
  int moves = 0;
  bool done = false;
};

class Interpreter {
 public:
  explicit Interpreter(skillgym::GameSpec spec);

  State initial() const;
  std::vector<std::string> admissible(const State& s) const;
  // Commands outside the admissible set only cost a move.
  State step(const State& s, const std::string& command) const;
  std::string canonical(const State& s) const;

 private:
  struct Cmd {
    std::string verb;  // default verb or custom action name
    std::string a, b;
    std::map<std::string, std::string> slots;
  };
  skillgym::GameSpec spec_;
  std::set<std::string> referenced_;  // action strings named by predicates

  bool visible(const State& s, const std::string& e) const;
  bool has(const State& s, const std::string& e, const std::string& f) const;
  void set(State& s, const std::string& e, const std::string& f, bool v) const;
  bool test(const State& s, const skillgym::Predicate& p, const std::map<std::string, std::string>& slots) const;
  std::string place(const std::string& loc, const std::map<std::string, std::string>& slots) const;
  std::map<std::string, Cmd> enumerate(const State& s) const;
  bool run(State& s, const Cmd& c) const;
};

std::string canonical_engine(const skillgym::engine::Game& game, const skillgym::engine::WorldState& s);

}  // namespace refint
