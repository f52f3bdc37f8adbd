#pragma once

// Corpus split, pretraining, evaluation and transfer comparison.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "skillgym/agent.hpp"
#include "skillgym/engine.hpp"
#include "skillgym/rlenv.hpp"

namespace skillgym::experiments {

using GamePtr = std::shared_ptr<const engine::Game>;

enum class AgentKind { random, fresh, pretrained };
std::string_view to_string(AgentKind k);
std::optional<AgentKind> agent_kind_from(std::string_view s);

// Training defaults used by every experiment. Adam without clipping; plain
// SGD at the agent's default rate does not move the policy within budget.
agent::TrainConfig experiment_train_config();

struct ExperimentPlan {
  std::filesystem::path corpus;
  double train_fraction = 0.75;
  std::uint64_t split_seed = 0;
  // When both are non-empty they replace the seeded split.
  std::vector<std::string> train_ids;
  std::vector<std::string> eval_ids;
  int episodes = 100;
  int max_steps = 50;
  int repeats = 3;
  std::uint64_t seed = 1;
  std::vector<AgentKind> agents{AgentKind::random, AgentKind::fresh, AgentKind::pretrained};
  agent::Dims dims;
  agent::TrainConfig train = experiment_train_config();
  agent::Mode eval_mode = agent::Mode::sample;
  // Trailing window for the smoothed training curve.
  int smoothing = 5;
  double transfer_threshold = 0.5;

  // Throws std::invalid_argument on out-of-range fields.
  void check() const;
};

// Every *.game.json under dir, parsed, validated and sorted by id.
std::vector<GamePtr> load_corpus(const std::filesystem::path& dir);
std::vector<GamePtr> select(const std::vector<GamePtr>& games, const std::vector<std::string>& ids);
// One id per line; blank lines and '#' comments skipped.
std::vector<std::string> read_id_list(const std::filesystem::path& path);

struct Split {
  std::vector<GamePtr> train;
  std::vector<GamePtr> eval;
};
Split split_corpus(const std::vector<GamePtr>& games, const ExperimentPlan& plan);

// Vocabulary of everything the games can print.
agent::Vocab corpus_vocab(const std::vector<GamePtr>& games);

// Action selection for evaluation rollouts.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual void begin(const engine::Game&) {}
  virtual std::string act(const rlenv::Observation& obs, std::mt19937_64& rng) = 0;
};

class RandomPolicy : public Policy {
 public:
  std::string act(const rlenv::Observation& obs, std::mt19937_64& rng) override;
};

class AgentPolicy : public Policy {
 public:
  AgentPolicy(agent::Agent& agent, agent::Mode mode) : agent_(agent), mode_(mode) {}
  std::string act(const rlenv::Observation& obs, std::mt19937_64& rng) override;

 private:
  agent::Agent& agent_;
  agent::Mode mode_;
};

// Replays the validator's shortest solution for each game.
class OraclePolicy : public Policy {
 public:
  void begin(const engine::Game& game) override;
  std::string act(const rlenv::Observation& obs, std::mt19937_64& rng) override;

 private:
  std::vector<std::string> plan_;
  std::size_t next_ = 0;
};

struct EpisodeResult {
  double score = 0;  // normalized
  int moves = 0;
  bool won = false;
};

EpisodeResult rollout(Policy& policy, const GamePtr& game, int max_steps, std::mt19937_64& rng);

// One sampled episode that ends in an A2C update on the full trajectory.
EpisodeResult train_episode(agent::Agent& agent, const GamePtr& game, const agent::TrainConfig& cfg, int max_steps,
                            std::mt19937_64& rng);

struct CurvePoint {
  int episode = 0;
  std::string agent;
  std::string game;
  double score = 0;
  int moves = 0;
};

struct GameScore {
  std::string game;
  double score = 0;
  double moves = 0;
};

struct EvalSummary {
  std::string agent;
  double mean_score = 0, std_score = 0;
  double mean_moves = 0, std_moves = 0;
  std::vector<GameScore> per_game;
  std::vector<CurvePoint> curve;
};

// repeats x games rollouts without learning. The spread is over repeats.
EvalSummary evaluate(Policy& policy, const std::vector<GamePtr>& games, const ExperimentPlan& plan,
                     const std::string& agent_name);

// Mean score per episode across games, in episode order.
std::vector<double> episode_means(const std::vector<CurvePoint>& curve);
// Trailing moving average (shorter at the start).
std::vector<double> smooth(const std::vector<double>& xs, int window);
// First 1-based episode whose smoothed mean reaches threshold.
std::optional<int> episodes_to_threshold(const std::vector<CurvePoint>& curve, double threshold, int window);

struct PretrainResult {
  agent::Agent agent;
  std::vector<CurvePoint> curve;
};

// Trains a fresh agent seeded with plan.seed. Each episode plays every
// training game once, in order. NonFiniteLoss is rethrown with the episode.
PretrainResult pretrain(const std::vector<GamePtr>& train, const ExperimentPlan& plan,
                        const std::string& agent_name = "pretrained");

// Continues training an existing agent; episode numbers start at 1.
std::vector<CurvePoint> fine_tune(agent::Agent& agent, const std::vector<GamePtr>& games, const ExperimentPlan& plan,
                                  std::uint64_t seed, const std::string& agent_name);

struct TransferArm {
  std::string agent;
  std::vector<std::optional<int>> episodes_to_threshold;  // one per seed
  double mean_episodes = 0;  // unreached seeds count as episodes + 1
  std::vector<double> final_scores;
  double mean_final_score = 0;
  std::vector<CurvePoint> curve;
};

struct TransferReport {
  TransferArm fresh;
  TransferArm pretrained;
  double threshold = 0.5;
  // pretrained.mean_episodes / fresh.mean_episodes
  double episode_ratio = 0;
};

// Fine-tunes a fresh agent and a copy of `pretrained` on the targets with
// the same budget and seeds (plan.seed + r for r < plan.repeats).
TransferReport compare_transfer(const agent::Agent& pretrained, const std::vector<GamePtr>& targets,
                                const ExperimentPlan& plan);

struct RunOutput {
  std::vector<EvalSummary> evaluations;
  std::optional<TransferReport> transfer;
  std::vector<CurvePoint> curves;
};

// Writes summary.json and curves.csv under dir.
void write_results(const std::filesystem::path& dir, const ExperimentPlan& plan, const RunOutput& out);
std::string curves_csv(const std::vector<CurvePoint>& curve);

}  // namespace skillgym::experiments
