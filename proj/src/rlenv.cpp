#include "skillgym/rlenv.hpp"

#include <algorithm>

#include <json.hpp>

namespace skillgym::rlenv {

Environment::Environment(std::shared_ptr<const engine::Game> game, EnvConfig config)
    : game_(std::move(game)), config_(config) {
  if (!game_) throw std::invalid_argument("environment needs a game");
  if (config_.max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
}

EnvStep Environment::observe(std::string feedback, int reward) {
  EnvStep out;
  candidates_ = done_ ? std::vector<engine::Candidate>{} : game_->candidates(state_);
  out.observation.feedback = std::move(feedback);
  out.observation.room_description = game_->room_description(state_);
  out.observation.inventory = game_->inventory_text(state_);
  out.observation.admissible_commands.reserve(candidates_.size());
  for (const auto& c : candidates_) out.observation.admissible_commands.push_back(c.text);
  out.reward = reward;
  out.done = done_;
  out.info = {state_.score, game_->max_score(), state_.moves, state_.won()};
  return out;
}

EnvStep Environment::reset(std::uint64_t seed) {
  state_ = game_->initial_state(seed);
  done_ = false;
  started_ = true;
  auto intro = game_->intro(state_);
  return observe(std::move(intro.feedback), 0);
}

EnvStep Environment::step(std::string_view action_text) {
  if (!started_ || done_) throw engine::EpisodeFinished();
  // Admissible strings map straight to their parsed form.
  auto it = std::lower_bound(candidates_.begin(), candidates_.end(), action_text,
                             [](const engine::Candidate& c, std::string_view t) { return c.text < t; });
  std::optional<Command> cmd;
  if (it != candidates_.end() && it->text == action_text) {
    cmd = it->command;
  } else {
    try {
      cmd = game_->parse(action_text, state_);
    } catch (const ParseError&) {
    }
  }
  std::string feedback;
  int reward = 0;
  if (cmd) {
    auto [next, result] = game_->step(state_, *cmd, false);
    state_ = std::move(next);
    feedback = std::move(result.feedback);
    reward = result.score_delta;
    if (reward < 0 && !config_.failure_penalty_enabled) reward = 0;
  } else {
    state_.moves += 1;
    feedback = kUnparsedFeedback;
  }
  done_ = state_.done || state_.moves >= config_.max_steps;
  return observe(std::move(feedback), reward);
}

double Environment::normalized_score() const {
  if (game_->max_score() <= 0) return 0.0;
  return std::clamp(static_cast<double>(state_.score) / game_->max_score(), 0.0, 1.0);
}

std::string to_jsonl(const EpisodeMetrics& m) {
  nlohmann::ordered_json j;
  j["game_id"] = m.game_id;
  j["episode"] = m.episode;
  j["score"] = m.score;
  j["normalized"] = m.normalized;
  j["moves"] = m.moves;
  j["won"] = m.won;
  return j.dump();
}

}  // namespace skillgym::rlenv
