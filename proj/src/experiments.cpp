#include "skillgym/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "skillgym/gamespec.hpp"
#include "skillgym/text.hpp"
#include "skillgym/validator.hpp"

namespace skillgym::experiments {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string_view to_string(AgentKind k) {
  switch (k) {
    case AgentKind::random: return "random";
    case AgentKind::fresh: return "fresh";
    case AgentKind::pretrained: return "pretrained";
  }
  return "?";
}

std::optional<AgentKind> agent_kind_from(std::string_view s) {
  for (auto k : {AgentKind::random, AgentKind::fresh, AgentKind::pretrained})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

agent::TrainConfig experiment_train_config() {
  agent::TrainConfig cfg;
  cfg.optimizer = agent::TrainConfig::Optimizer::adam;
  cfg.learning_rate = 1e-3;
  cfg.clip_norm = std::numeric_limits<double>::infinity();
  return cfg;
}

void ExperimentPlan::check() const {
  if (!(train_fraction > 0 && train_fraction < 1)) throw std::invalid_argument("train fraction must be in (0, 1)");
  if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
  if (episodes < 0) throw std::invalid_argument("episodes must be >= 0");
  if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
  if (smoothing < 1) throw std::invalid_argument("smoothing window must be >= 1");
}

// ---------------------------------------------------------------- corpus

std::vector<GamePtr> load_corpus(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (e.is_regular_file() && name.size() > 10 && name.ends_with(".game.json")) files.push_back(e.path());
  }
  std::vector<GamePtr> games;
  for (const auto& f : files) games.push_back(std::make_shared<const engine::Game>(load_spec_file(f.string())));
  std::sort(games.begin(), games.end(), [](const GamePtr& a, const GamePtr& b) { return a->spec().id < b->spec().id; });
  return games;
}

std::vector<GamePtr> select(const std::vector<GamePtr>& games, const std::vector<std::string>& ids) {
  std::vector<GamePtr> out;
  for (const auto& id : ids) {
    auto it = std::find_if(games.begin(), games.end(), [&](const GamePtr& g) { return g->spec().id == id; });
    if (it == games.end()) throw std::invalid_argument("unknown game id: " + id);
    out.push_back(*it);
  }
  return out;
}

std::vector<std::string> read_id_list(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    auto t = text::trim(line);
    if (!t.empty() && t[0] != '#') ids.push_back(t);
  }
  return ids;
}

Split split_corpus(const std::vector<GamePtr>& games, const ExperimentPlan& plan) {
  plan.check();
  if (!plan.train_ids.empty() && !plan.eval_ids.empty())
    return {select(games, plan.train_ids), select(games, plan.eval_ids)};
  auto order = games;
  std::mt19937_64 rng(plan.split_seed);
  std::shuffle(order.begin(), order.end(), rng);
  auto n_train = static_cast<std::size_t>(std::lround(plan.train_fraction * static_cast<double>(order.size())));
  n_train = std::clamp<std::size_t>(n_train, order.size() > 1 ? 1 : 0, order.size() > 1 ? order.size() - 1 : order.size());
  Split s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.eval.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return s;
}

agent::Vocab corpus_vocab(const std::vector<GamePtr>& games) {
  std::vector<std::string> texts;
  for (const auto& g : games)
    for (auto& t : agent::game_texts(g->spec())) texts.push_back(std::move(t));
  return agent::Vocab::build(texts);
}

namespace {

std::vector<std::string> texts_of(const std::vector<GamePtr>& games) {
  std::vector<std::string> texts;
  for (const auto& g : games)
    for (auto& t : agent::game_texts(g->spec())) texts.push_back(std::move(t));
  return texts;
}

}  // namespace

// ---------------------------------------------------------------- policies

std::string RandomPolicy::act(const rlenv::Observation& obs, std::mt19937_64& rng) {
  return obs.admissible_commands[static_cast<std::size_t>(agent::random_policy(obs.admissible_commands.size(), rng))];
}

std::string AgentPolicy::act(const rlenv::Observation& obs, std::mt19937_64& rng) {
  auto c = agent_.act(agent_.tokenize(obs), rng, mode_);
  return obs.admissible_commands[static_cast<std::size_t>(c.index)];
}

void OraclePolicy::begin(const engine::Game& game) {
  plan_ = validator::explore(game).solution;
  next_ = 0;
}

std::string OraclePolicy::act(const rlenv::Observation& obs, std::mt19937_64&) {
  if (next_ < plan_.size()) return plan_[next_++];
  return obs.admissible_commands.empty() ? std::string("look") : obs.admissible_commands.front();
}

// ---------------------------------------------------------------- rollouts

EpisodeResult rollout(Policy& policy, const GamePtr& game, int max_steps, std::mt19937_64& rng) {
  rlenv::Environment env(game, {.max_steps = max_steps});
  policy.begin(*game);
  auto s = env.reset();
  while (!s.done) s = env.step(policy.act(s.observation, rng));
  return {env.normalized_score(), env.state().moves, s.info.won};
}

EpisodeResult train_episode(agent::Agent& ag, const GamePtr& game, const agent::TrainConfig& cfg, int max_steps,
                            std::mt19937_64& rng) {
  rlenv::Environment env(game, {.max_steps = max_steps});
  auto s = env.reset();
  agent::Trajectory tr;
  while (!s.done) {
    auto in = ag.tokenize(s.observation);
    auto c = ag.act(in, rng, agent::Mode::sample);
    s = env.step(s.observation.admissible_commands[static_cast<std::size_t>(c.index)]);
    tr.steps.push_back({std::move(in), c.index, static_cast<double>(s.reward)});
  }
  if (!tr.steps.empty()) {
    tr.terminal = env.state().done;
    if (!tr.terminal) tr.bootstrap = ag.tokenize(s.observation);
    ag.update({tr}, cfg);
  }
  return {env.normalized_score(), env.state().moves, s.info.won};
}

EvalSummary evaluate(Policy& policy, const std::vector<GamePtr>& games, const ExperimentPlan& plan,
                     const std::string& agent_name) {
  plan.check();
  EvalSummary sum;
  sum.agent = agent_name;
  std::vector<double> rep_score, rep_moves;
  std::vector<GameScore> per(games.size());
  for (std::size_t i = 0; i < games.size(); ++i) per[i].game = games[i]->spec().id;
  for (int r = 0; r < plan.repeats; ++r) {
    std::mt19937_64 rng(plan.seed * 1000003ULL + static_cast<std::uint64_t>(r));
    double sc = 0, mv = 0;
    for (std::size_t i = 0; i < games.size(); ++i) {
      auto res = rollout(policy, games[i], plan.max_steps, rng);
      sc += res.score;
      mv += res.moves;
      per[i].score += res.score / plan.repeats;
      per[i].moves += static_cast<double>(res.moves) / plan.repeats;
      sum.curve.push_back({r + 1, agent_name, per[i].game, res.score, res.moves});
    }
    const auto n = static_cast<double>(std::max<std::size_t>(games.size(), 1));
    rep_score.push_back(sc / n);
    rep_moves.push_back(mv / n);
  }
  std::tie(sum.mean_score, sum.std_score) = validator::mean_std(rep_score);
  std::tie(sum.mean_moves, sum.std_moves) = validator::mean_std(rep_moves);
  sum.per_game = std::move(per);
  return sum;
}

// ---------------------------------------------------------------- curves

std::vector<double> episode_means(const std::vector<CurvePoint>& curve) {
  std::map<int, std::pair<double, int>> acc;
  for (const auto& p : curve) {
    auto& a = acc[p.episode];
    a.first += p.score;
    a.second += 1;
  }
  std::vector<double> out;
  for (const auto& [ep, a] : acc) out.push_back(a.first / a.second);
  return out;
}

std::vector<double> smooth(const std::vector<double>& xs, int window) {
  std::vector<double> out(xs.size());
  double run = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    run += xs[i];
    if (i >= static_cast<std::size_t>(window)) run -= xs[i - static_cast<std::size_t>(window)];
    out[i] = run / static_cast<double>(std::min<std::size_t>(i + 1, static_cast<std::size_t>(window)));
  }
  return out;
}

std::optional<int> episodes_to_threshold(const std::vector<CurvePoint>& curve, double threshold, int window) {
  auto s = smooth(episode_means(curve), window);
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] >= threshold) return static_cast<int>(i + 1);
  return std::nullopt;
}

// ---------------------------------------------------------------- training

std::vector<CurvePoint> fine_tune(agent::Agent& ag, const std::vector<GamePtr>& games, const ExperimentPlan& plan,
                                  std::uint64_t seed, const std::string& agent_name) {
  plan.check();
  std::mt19937_64 rng(seed);
  std::vector<CurvePoint> curve;
  for (int ep = 1; ep <= plan.episodes; ++ep) {
    for (const auto& g : games) {
      EpisodeResult res;
      try {
        res = train_episode(ag, g, plan.train, plan.max_steps, rng);
      } catch (const agent::NonFiniteLoss& e) {
        throw agent::NonFiniteLoss("episode " + std::to_string(ep) + ": " + e.what());
      }
      curve.push_back({ep, agent_name, g->spec().id, res.score, res.moves});
    }
  }
  return curve;
}

PretrainResult pretrain(const std::vector<GamePtr>& train, const ExperimentPlan& plan, const std::string& agent_name) {
  PretrainResult out{agent::Agent(corpus_vocab(train), plan.dims, plan.seed), {}};
  out.curve = fine_tune(out.agent, train, plan, plan.seed, agent_name);
  return out;
}

TransferReport compare_transfer(const agent::Agent& pretrained, const std::vector<GamePtr>& targets,
                                const ExperimentPlan& plan) {
  plan.check();
  TransferReport rep;
  rep.threshold = plan.transfer_threshold;
  rep.fresh.agent = "fresh";
  rep.pretrained.agent = "pretrained";
  const auto texts = texts_of(targets);
  auto finish = [&](TransferArm& arm, agent::Agent& ag, std::uint64_t seed) {
    auto curve = fine_tune(ag, targets, plan, seed, arm.agent);
    auto reached = episodes_to_threshold(curve, plan.transfer_threshold, plan.smoothing);
    arm.episodes_to_threshold.push_back(reached);
    AgentPolicy pol(ag, plan.eval_mode);
    auto eval_plan = plan;
    eval_plan.seed = seed;
    arm.final_scores.push_back(evaluate(pol, targets, eval_plan, arm.agent).mean_score);
    for (auto& p : curve) arm.curve.push_back(std::move(p));
  };
  for (int r = 0; r < plan.repeats; ++r) {
    const auto seed = plan.seed + static_cast<std::uint64_t>(r);
    agent::Agent fresh(agent::Vocab::build(texts), plan.dims, seed);
    finish(rep.fresh, fresh, seed);
    agent::Agent warm = pretrained;
    warm.extend_vocab(texts, seed);
    finish(rep.pretrained, warm, seed);
  }
  for (auto* arm : {&rep.fresh, &rep.pretrained}) {
    double eps = 0;
    for (const auto& e : arm->episodes_to_threshold) eps += e ? *e : plan.episodes + 1;
    arm->mean_episodes = eps / plan.repeats;
    arm->mean_final_score =
        std::accumulate(arm->final_scores.begin(), arm->final_scores.end(), 0.0) / plan.repeats;
  }
  rep.episode_ratio = rep.fresh.mean_episodes > 0 ? rep.pretrained.mean_episodes / rep.fresh.mean_episodes : 0;
  return rep;
}

// ---------------------------------------------------------------- output

std::string curves_csv(const std::vector<CurvePoint>& curve) {
  std::ostringstream os;
  os << "episode,agent,game,score,moves\n";
  for (const auto& p : curve) os << p.episode << ',' << p.agent << ',' << p.game << ',' << p.score << ',' << p.moves << '\n';
  return os.str();
}

namespace {

ordered_json eval_json(const EvalSummary& e) {
  ordered_json j;
  j["agent"] = e.agent;
  j["mean_normalized_score"] = e.mean_score;
  j["std_normalized_score"] = e.std_score;
  j["mean_moves"] = e.mean_moves;
  j["std_moves"] = e.std_moves;
  auto& games = j["per_game"] = ordered_json::array();
  for (const auto& g : e.per_game) games.push_back({{"game", g.game}, {"score", g.score}, {"moves", g.moves}});
  return j;
}

ordered_json arm_json(const TransferArm& a) {
  ordered_json j;
  j["agent"] = a.agent;
  auto& eps = j["episodes_to_threshold"] = ordered_json::array();
  for (const auto& e : a.episodes_to_threshold) eps.push_back(e ? ordered_json(*e) : ordered_json(nullptr));
  j["mean_episodes"] = a.mean_episodes;
  j["final_scores"] = a.final_scores;
  j["mean_final_score"] = a.mean_final_score;
  return j;
}

}  // namespace

void write_results(const fs::path& dir, const ExperimentPlan& plan, const RunOutput& out) {
  fs::create_directories(dir);
  ordered_json j;
  auto& p = j["plan"];
  p["corpus"] = plan.corpus.string();
  p["train_fraction"] = plan.train_fraction;
  p["split_seed"] = plan.split_seed;
  p["train_ids"] = plan.train_ids;
  p["eval_ids"] = plan.eval_ids;
  p["episodes"] = plan.episodes;
  p["max_steps"] = plan.max_steps;
  p["repeats"] = plan.repeats;
  p["seed"] = plan.seed;
  p["eval_mode"] = plan.eval_mode == agent::Mode::greedy ? "greedy" : "sample";
  auto& ev = j["evaluations"] = ordered_json::array();
  for (const auto& e : out.evaluations) ev.push_back(eval_json(e));
  if (out.transfer) {
    auto& t = j["transfer"];
    t["threshold"] = out.transfer->threshold;
    t["fresh"] = arm_json(out.transfer->fresh);
    t["pretrained"] = arm_json(out.transfer->pretrained);
    t["episode_ratio"] = out.transfer->episode_ratio;
  }
  std::ofstream(dir / "summary.json", std::ios::binary) << j.dump(2) << "\n";
  std::ofstream(dir / "curves.csv", std::ios::binary) << curves_csv(out.curves);
}

}  // namespace skillgym::experiments
