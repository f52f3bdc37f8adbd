#include "skillgym/validator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_map>

namespace skillgym::validator {

NotWinnable::NotWinnable(std::vector<std::string> ids)
    : std::runtime_error([&] {
        std::string msg = "not winnable:";
        for (const auto& id : ids) msg += " " + id;
        return msg;
      }()),
      ids_(std::move(ids)) {}

namespace {

struct Node {
  engine::WorldState state;
  int parent = -1;
  int depth = 0;
  std::string command;
};

}  // namespace

ExplorationReport explore(const engine::Game& game, ExploreLimits limits) {
  if (limits.max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
  ExplorationReport rep;
  const auto& spec = game.spec();

  std::vector<Node> nodes;
  std::unordered_map<std::string, int> index;
  std::vector<std::pair<int, int>> edges;
  int won_node = -1;

  auto root = game.initial_state();
  index.emplace(game.state_key(root), 0);
  nodes.push_back({std::move(root), -1, 0, ""});

  for (std::size_t cur = 0; cur < nodes.size(); ++cur) {
    if (nodes[cur].state.done) continue;
    const int depth = nodes[cur].depth;
    const bool at_cap = depth >= limits.max_depth;
    const auto cmds = game.commands(nodes[cur].state);
    for (const auto& cmd : cmds) {
      // `nodes` may reallocate below, so index it afresh each time.
      auto child = game.advance(nodes[cur].state, cmd);
      auto key = game.state_key(child);
      auto it = index.find(key);
      if (it != index.end()) {
        if (it->second != static_cast<int>(cur)) edges.emplace_back(static_cast<int>(cur), it->second);
        continue;
      }
      if (at_cap) {
        rep.truncated = true;
        continue;
      }
      const int id = static_cast<int>(nodes.size());
      if (nodes.size() >= limits.max_states) throw StateSpaceOverflow(limits.max_states);
      index.emplace(std::move(key), id);
      const bool won = child.won();
      nodes.push_back({std::move(child), static_cast<int>(cur), depth + 1, render_command(cmd, spec)});
      edges.emplace_back(static_cast<int>(cur), id);
      if (won && won_node < 0) won_node = id;
    }
  }

  rep.visited_states = nodes.size();
  std::uint64_t seen_rewards = 0;
  for (const auto& n : nodes) seen_rewards |= n.state.collected_rewards;
  for (std::size_t i = 0; i < spec.rewards.size(); ++i) {
    if ((seen_rewards >> i) & 1U)
      rep.reachable_rewards.insert(i);
    else
      rep.unreachable_rewards.insert(i);
  }
  if (won_node >= 0) {
    rep.winnable = true;
    rep.min_steps = nodes[static_cast<std::size_t>(won_node)].depth;
    for (int n = won_node; nodes[static_cast<std::size_t>(n)].parent >= 0; n = nodes[static_cast<std::size_t>(n)].parent)
      rep.solution.push_back(nodes[static_cast<std::size_t>(n)].command);
    std::reverse(rep.solution.begin(), rep.solution.end());
  }

  // Backward propagation of "some further reward is reachable".
  const std::size_t n = nodes.size();
  std::vector<std::vector<int>> parents(n);
  std::vector<char> progress(n, 0);
  std::vector<int> work;
  for (const auto& [from, to] : edges) {
    parents[static_cast<std::size_t>(to)].push_back(from);
    if (std::popcount(nodes[static_cast<std::size_t>(to)].state.collected_rewards) >
            std::popcount(nodes[static_cast<std::size_t>(from)].state.collected_rewards) &&
        !progress[static_cast<std::size_t>(from)]) {
      progress[static_cast<std::size_t>(from)] = 1;
      work.push_back(from);
    }
  }
  while (!work.empty()) {
    int t = work.back();
    work.pop_back();
    for (int p : parents[static_cast<std::size_t>(t)])
      if (!progress[static_cast<std::size_t>(p)]) {
        progress[static_cast<std::size_t>(p)] = 1;
        work.push_back(p);
      }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!progress[i] && !nodes[i].state.won()) ++rep.dead_states;
  return rep;
}

ExplorationReport explore(const GameSpec& spec, int max_depth) {
  engine::Game game(spec);
  ExploreLimits limits;
  limits.max_depth = max_depth;
  return explore(game, limits);
}

int min_steps(const GameSpec& spec) {
  auto rep = explore(spec);
  if (!rep.winnable) throw NotWinnable({spec.id});
  return *rep.min_steps;
}

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());
  return {mean, std::sqrt(var)};
}

CorpusStats summarize(const std::vector<GameRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("corpus is empty");
  std::vector<double> steps, rewards, skills;
  for (const auto& r : rows) {
    steps.push_back(r.min_steps);
    rewards.push_back(static_cast<double>(r.rewards));
    skills.push_back(static_cast<double>(r.skills));
  }
  CorpusStats s;
  std::tie(s.min_actions_mean, s.min_actions_std) = mean_std(steps);
  std::tie(s.rewards_per_game_mean, s.rewards_per_game_std) = mean_std(rewards);
  std::tie(s.skills_per_game_mean, s.skills_per_game_std) = mean_std(skills);
  s.game_count = rows.size();
  return s;
}

CorpusStats corpus_stats(const std::vector<GameSpec>& specs, std::vector<GameRow>* rows_out) {
  std::vector<GameRow> rows;
  std::vector<std::string> bad;
  for (const auto& spec : specs) {
    auto rep = explore(spec);
    if (!rep.winnable) {
      bad.push_back(spec.id);
      continue;
    }
    rows.push_back({spec.id, *rep.min_steps, spec.rewards.size(), spec.custom_actions.size()});
  }
  if (!bad.empty()) throw NotWinnable(bad);
  auto stats = summarize(rows);
  if (rows_out) *rows_out = std::move(rows);
  return stats;
}

std::string stats_csv(const std::vector<GameRow>& rows, const CorpusStats& stats) {
  std::ostringstream out;
  out << "id,min_steps,rewards,skills\n";
  for (const auto& r : rows) out << r.id << ',' << r.min_steps << ',' << r.rewards << ',' << r.skills << '\n';
  char buf[256];
  std::snprintf(buf, sizeof(buf), "summary(n=%zu),%.2f +/- %.2f,%.2f +/- %.2f,%.2f +/- %.2f\n", stats.game_count,
                stats.min_actions_mean, stats.min_actions_std, stats.rewards_per_game_mean, stats.rewards_per_game_std,
                stats.skills_per_game_mean, stats.skills_per_game_std);
  out << buf;
  return out.str();
}

}  // namespace skillgym::validator
