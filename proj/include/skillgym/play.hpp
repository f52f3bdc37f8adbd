#pragma once

// Line-oriented play loop for human testers and scripted sessions.

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "skillgym/engine.hpp"

namespace skillgym::play {

struct PlayOptions {
  bool show_admissible = false;
  std::optional<std::filesystem::path> transcript_path;
  int max_steps = 100;
};

struct PlaySession {
  std::string spec_id;
  std::vector<engine::TranscriptRecord> transcript;
  int score = 0;
  int moves = 0;
  bool won = false;
};

// Reads commands until the game ends, input runs out, or "quit".
PlaySession play_repl(const std::shared_ptr<const engine::Game>& game, std::istream& in, std::ostream& out,
                      const PlayOptions& options = {});

// Replays a saved transcript; the returned session has the replayed score
// and moves and the original records.
PlaySession replay_transcript(const engine::Game& game, const std::filesystem::path& path);

}  // namespace skillgym::play
