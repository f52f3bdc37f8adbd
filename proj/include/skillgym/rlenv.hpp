#pragma once

// Episodic reset/step interface over the engine.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "skillgym/engine.hpp"

namespace skillgym::rlenv {

struct EnvConfig {
  int max_steps = 50;
  // When false, fatal actions end the episode without a negative reward.
  bool failure_penalty_enabled = true;
};

struct Observation {
  std::string feedback;
  std::string room_description;
  std::string inventory;
  std::vector<std::string> admissible_commands;
  bool operator==(const Observation&) const = default;
};

struct StepInfo {
  int score = 0;
  int max_score = 0;
  int moves = 0;
  bool won = false;
  bool operator==(const StepInfo&) const = default;
};

struct EnvStep {
  Observation observation;
  int reward = 0;
  bool done = false;
  StepInfo info;
  bool operator==(const EnvStep&) const = default;
};

inline constexpr const char* kUnparsedFeedback = "I didn't understand that sentence.";

class Environment {
 public:
  explicit Environment(std::shared_ptr<const engine::Game> game, EnvConfig config = {});

  EnvStep reset(std::uint64_t seed = 0);
  // Throws engine::EpisodeFinished after done.
  EnvStep step(std::string_view action_text);

  double normalized_score() const;
  const engine::WorldState& state() const { return state_; }
  const engine::Game& game() const { return *game_; }
  const EnvConfig& config() const { return config_; }
  bool done() const { return done_; }

 private:
  std::shared_ptr<const engine::Game> game_;
  EnvConfig config_;
  engine::WorldState state_;
  std::vector<engine::Candidate> candidates_;
  bool done_ = true;
  bool started_ = false;

  EnvStep observe(std::string feedback, int reward);
};

struct EpisodeMetrics {
  std::string game_id;
  int episode = 0;
  int score = 0;
  double normalized = 0;
  int moves = 0;
  bool won = false;
};

// One JSON object per line: {game_id, episode, score, normalized, moves, won}.
std::string to_jsonl(const EpisodeMetrics& m);

}  // namespace skillgym::rlenv
