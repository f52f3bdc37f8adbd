#include "skillgym/play.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "skillgym/rlenv.hpp"
#include "skillgym/text.hpp"

namespace skillgym::play {

namespace {

void show(std::ostream& out, const rlenv::EnvStep& s, bool admissible) {
  out << s.observation.feedback << "\n";
  out << "[score " << s.info.score << "/" << s.info.max_score << ", moves " << s.info.moves << "]\n";
  if (admissible && !s.done) {
    out << "You can:";
    for (const auto& a : s.observation.admissible_commands) out << " " << a << ";";
    out << "\n";
  }
}

}  // namespace

PlaySession play_repl(const std::shared_ptr<const engine::Game>& game, std::istream& in, std::ostream& out,
                      const PlayOptions& options) {
  rlenv::Environment env(game, {.max_steps = options.max_steps});
  PlaySession session;
  session.spec_id = game->spec().id;
  out << game->spec().title << "\n" << "Goal: " << game->spec().goal_text << "\n\n";
  auto s = env.reset();
  show(out, s, options.show_admissible);
  std::string line;
  while (!s.done) {
    out << "> " << std::flush;
    if (!std::getline(in, line)) break;
    auto cmd = text::trim(line);
    if (cmd.empty()) continue;
    auto lower = text::to_lower(cmd);
    if (lower == "quit" || lower == "exit") break;
    s = env.step(cmd);
    session.transcript.push_back({s.info.moves, cmd, s.observation.feedback, s.info.score, s.done});
    show(out, s, options.show_admissible);
  }
  session.score = env.state().score;
  session.moves = env.state().moves;
  session.won = env.state().won();
  out << (session.won ? "You won" : "Game over") << " with " << session.score << " of " << game->max_score()
      << " points in " << session.moves << " moves.\n";
  if (options.transcript_path) {
    std::ofstream f(*options.transcript_path, std::ios::binary);
    engine::write_transcript(f, session.transcript);
  }
  return session;
}

PlaySession replay_transcript(const engine::Game& game, const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read transcript " + path.string());
  PlaySession session;
  session.spec_id = game.spec().id;
  session.transcript = engine::read_transcript(f);
  std::vector<std::string> commands;
  for (const auto& r : session.transcript) commands.push_back(r.command);
  auto state = engine::replay(game, commands);
  session.score = state.score;
  session.moves = state.moves;
  session.won = state.won();
  return session;
}

}  // namespace skillgym::play
