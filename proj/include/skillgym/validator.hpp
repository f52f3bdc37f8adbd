#pragma once

// Exhaustive state-space search over a game: winnability, shortest
// solutions, reachable rewards and corpus statistics.

#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "skillgym/engine.hpp"
#include "skillgym/gamespec.hpp"

namespace skillgym::validator {

struct ExploreLimits {
  int max_depth = 25;
  std::size_t max_states = 1'000'000;
};

struct ExplorationReport {
  bool winnable = false;
  std::optional<int> min_steps;
  std::set<std::size_t> reachable_rewards;
  std::set<std::size_t> unreachable_rewards;
  std::size_t visited_states = 0;
  // Non-winning states from which no further reward can be collected.
  std::size_t dead_states = 0;
  bool truncated = false;
  // One shortest winning command sequence (empty when not winnable).
  std::vector<std::string> solution;
};

class StateSpaceOverflow : public std::runtime_error {
 public:
  explicit StateSpaceOverflow(std::size_t limit)
      : std::runtime_error("state space exceeds " + std::to_string(limit) + " states"), limit_(limit) {}
  std::size_t limit() const { return limit_; }

 private:
  std::size_t limit_;
};

class NotWinnable : public std::runtime_error {
 public:
  explicit NotWinnable(std::vector<std::string> ids);
  const std::vector<std::string>& ids() const { return ids_; }

 private:
  std::vector<std::string> ids_;
};

// Breadth-first expansion with duplicate-state pruning.
ExplorationReport explore(const engine::Game& game, ExploreLimits limits = {});
ExplorationReport explore(const GameSpec& spec, int max_depth = 25);

// Throws NotWinnable when the game cannot be won within the default limits.
int min_steps(const GameSpec& spec);

struct CorpusStats {
  double min_actions_mean = 0, min_actions_std = 0;
  double rewards_per_game_mean = 0, rewards_per_game_std = 0;
  double skills_per_game_mean = 0, skills_per_game_std = 0;
  std::size_t game_count = 0;
};

struct GameRow {
  std::string id;
  int min_steps = 0;
  std::size_t rewards = 0;
  std::size_t skills = 0;
};

// Population mean and standard deviation.
std::pair<double, double> mean_std(const std::vector<double>& xs);

CorpusStats summarize(const std::vector<GameRow>& rows);
// Explores every spec; throws NotWinnable naming all offenders.
CorpusStats corpus_stats(const std::vector<GameSpec>& specs, std::vector<GameRow>* rows = nullptr);

// id,min_steps,rewards,skills per game, then a summary row.
std::string stats_csv(const std::vector<GameRow>& rows, const CorpusStats& stats);

}  // namespace skillgym::validator
