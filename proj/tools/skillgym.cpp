// skillgym command-line front end.
//
// Exit codes: 0 success, 1 domain error, 2 usage error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "skillgym/agent.hpp"
#include "skillgym/config.hpp"
#include "skillgym/experiments.hpp"
#include "skillgym/gamespec.hpp"
#include "skillgym/llmgen.hpp"
#include "skillgym/play.hpp"
#include "skillgym/text.hpp"
#include "skillgym/validator.hpp"

namespace fs = std::filesystem;
using namespace skillgym;

namespace {

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// "idea text | skill, skill" per line.
std::vector<llmgen::GameIdea> read_ideas(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot read ideas file " + path.string());
  std::vector<llmgen::GameIdea> ideas;
  std::string line;
  while (std::getline(in, line)) {
    auto t = text::trim(line);
    if (t.empty() || t[0] == '#') continue;
    llmgen::GameIdea idea;
    auto bar = t.find('|');
    idea.idea_text = text::trim(t.substr(0, bar));
    if (bar != std::string::npos)
      for (auto& s : text::split(t.substr(bar + 1), ','))
        if (auto k = text::trim(s); !k.empty()) idea.required_skills.push_back(k);
    ideas.push_back(std::move(idea));
  }
  return ideas;
}

std::vector<fs::path> spec_files(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p))
        if (e.is_regular_file() && e.path().filename().string().ends_with(".game.json")) found.push_back(e.path());
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::exists(p)) {
      files.push_back(p);
    } else {
      throw DomainError("no such file or directory: " + in);
    }
  }
  return files;
}

std::shared_ptr<const engine::Game> load_game(const std::string& path) {
  return std::make_shared<const engine::Game>(load_spec_file(path));
}

agent::Mode mode_from(const std::string& s) { return s == "greedy" ? agent::Mode::greedy : agent::Mode::sample; }

void print_eval(const experiments::EvalSummary& e) {
  std::cout << std::fixed << std::setprecision(3) << e.agent << ": score " << e.mean_score << " +- " << e.std_score
            << ", moves " << std::setprecision(1) << e.mean_moves << " +- " << e.std_moves << "\n";
  std::cout.unsetf(std::ios::floatfield);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"skillgym: generated text games for skill-learning agents"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  std::string config_path;
  app.add_option("--config", config_path, "key = value settings file");

  // generate
  auto* gen = app.add_subcommand("generate", "Generate game specs from ideas");
  std::vector<std::string> idea_texts;
  std::string ideas_file, fixtures_dir, gen_out = "games", skills_csv, base_url, model;
  int retries = 5;
  gen->add_option("--idea", idea_texts, "Game idea text (repeatable)");
  gen->add_option("--ideas", ideas_file, "File with one idea per line");
  gen->add_option("--skills", skills_csv, "Comma-separated skills required by --idea");
  gen->add_option("--fixtures", fixtures_dir, "Serve canned responses from this directory");
  gen->add_option("--out", gen_out, "Output directory");
  gen->add_option("--retries", retries, "Attempts per idea");
  gen->add_option("--base-url", base_url, "Completion endpoint base URL");
  gen->add_option("--model", model, "Completion model name");

  // validate
  auto* val = app.add_subcommand("validate", "Certify games as winnable");
  std::vector<std::string> val_inputs;
  int max_depth = 25;
  val->add_option("paths", val_inputs, "Spec files or directories")->required();
  val->add_option("--max-depth", max_depth, "Search depth cap");

  // export-inform7
  auto* exp = app.add_subcommand("export-inform7", "Write an Inform 7 source file");
  std::string exp_spec, exp_out;
  exp->add_option("spec", exp_spec, "Spec file")->required();
  exp->add_option("--out", exp_out, "Output file (default stdout)");

  // play
  auto* ply = app.add_subcommand("play", "Play a game on standard input");
  std::string play_spec, transcript, replay_path;
  bool show_admissible = false;
  int play_steps = 100;
  ply->add_option("spec", play_spec, "Spec file")->required();
  ply->add_flag("--show-admissible", show_admissible, "List admissible commands each turn");
  ply->add_option("--transcript", transcript, "Write a JSON-lines transcript");
  ply->add_option("--replay", replay_path, "Replay a transcript instead of reading input");
  ply->add_option("--max-steps", play_steps, "Move cap");

  // train / eval share plan options
  std::string corpus = "data/games", train_list, eval_list, out_root = "results", run_id, transfer_dir,
              eval_mode = "sample", checkpoint, agent_name = "checkpoint", games_list;
  int episodes = 100, max_steps = 50, repeats = 3, transfer_episodes = 100;
  std::uint64_t seed = 1;
  double train_fraction = 0.75;

  auto* trn = app.add_subcommand("train", "Pretrain an agent and evaluate it");
  trn->add_option("--corpus", corpus, "Directory of game specs");
  trn->add_option("--train-list", train_list, "Training game ids");
  trn->add_option("--eval-list", eval_list, "Evaluation game ids");
  trn->add_option("--train-fraction", train_fraction, "Share of games used for training");
  trn->add_option("--episodes", episodes, "Training episodes");
  trn->add_option("--max-steps", max_steps, "Episode step cap");
  trn->add_option("--repeats", repeats, "Evaluation repeats");
  trn->add_option("--seed", seed, "Random seed");
  trn->add_option("--out", out_root, "Results root");
  trn->add_option("--run-id", run_id, "Results subdirectory (default train-s<seed>)");
  trn->add_option("--eval-mode", eval_mode, "sample or greedy")->check(CLI::IsMember({"sample", "greedy"}));
  trn->add_option("--transfer", transfer_dir, "Also compare transfer on the games in this directory");
  trn->add_option("--transfer-episodes", transfer_episodes, "Fine-tuning budget per arm");

  auto* evl = app.add_subcommand("eval", "Evaluate a checkpoint or baseline");
  evl->add_option("--corpus", corpus, "Directory of game specs");
  evl->add_option("--games", games_list, "Restrict to these game ids");
  evl->add_option("--checkpoint", checkpoint, "Agent parameter file");
  evl->add_option("--agent", agent_name, "checkpoint, random or oracle")
      ->check(CLI::IsMember({"checkpoint", "random", "oracle"}));
  evl->add_option("--max-steps", max_steps, "Episode step cap");
  evl->add_option("--repeats", repeats, "Evaluation repeats");
  evl->add_option("--seed", seed, "Random seed");
  evl->add_option("--eval-mode", eval_mode, "sample or greedy")->check(CLI::IsMember({"sample", "greedy"}));
  evl->add_option("--out", out_root, "Write summary.json and curves.csv here");

  // stats
  auto* sts = app.add_subcommand("stats", "Corpus statistics as CSV");
  std::vector<std::string> stats_inputs;
  sts->add_option("paths", stats_inputs, "Spec files or directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    config::Config cfg;
    if (!config_path.empty()) cfg = config::Config::load(config_path);

    if (*gen) {
      std::vector<llmgen::GameIdea> ideas;
      if (!ideas_file.empty()) ideas = read_ideas(ideas_file);
      for (const auto& t : idea_texts) {
        llmgen::GameIdea idea{t, {}};
        for (auto& s : text::split(skills_csv, ','))
          if (auto k = text::trim(s); !k.empty()) idea.required_skills.push_back(k);
        ideas.push_back(std::move(idea));
      }
      if (ideas.empty()) {
        std::cerr << "generate: give --idea or --ideas\n" << gen->help();
        return 2;
      }
      auto llm = config::llm_settings(cfg, {base_url, model, "", fixtures_dir});
      std::unique_ptr<llmgen::CompletionClient> client;
      if (!llm.fixtures_dir.empty())
        client = std::make_unique<llmgen::FixtureClient>(llm.fixtures_dir);
      else
        client = std::make_unique<llmgen::HttpClient>(llm.base_url, llm.model, llm.api_key);
      llmgen::GenerationConfig gc;
      gc.max_retries = retries;
      int failed = 0;
      for (const auto& idea : ideas) {
        try {
          auto res = llmgen::generate_game(idea, *client, gc);
          auto path = llmgen::write_generation(res, idea, gen_out);
          std::cout << path.string() << " (attempts " << res.attempts << ")\n";
        } catch (const llmgen::GenerationFailed& e) {
          ++failed;
          std::cerr << idea.slug() << ": " << e.what() << "\n";
          for (const auto& err : e.errors()) std::cerr << "  " << err << "\n";
        }
      }
      return failed ? 1 : 0;
    }

    if (*val) {
      bool ok = true;
      std::cout << "id,valid,winnable,min_steps,rewards,states\n";
      for (const auto& f : spec_files(val_inputs)) {
        GameSpec spec;
        try {
          spec = load_spec_file(f.string());
        } catch (const std::exception& e) {
          ok = false;
          std::cout << f.filename().string() << ",no,no,,,\n";
          std::cerr << f.string() << ": " << e.what() << "\n";
          continue;
        }
        auto rep = validator::explore(spec, max_depth);
        ok = ok && rep.winnable;
        std::cout << spec.id << ",yes," << (rep.winnable ? "yes" : "no") << ","
                  << (rep.min_steps ? std::to_string(*rep.min_steps) : "") << "," << spec.rewards.size() << ","
                  << rep.visited_states << "\n";
      }
      return ok ? 0 : 1;
    }

    if (*exp) {
      auto src = emit_inform7(load_spec_file(exp_spec));
      if (exp_out.empty()) {
        std::cout << src;
      } else {
        std::ofstream(exp_out, std::ios::binary) << src;
      }
      return 0;
    }

    if (*ply) {
      auto game = load_game(play_spec);
      if (!replay_path.empty()) {
        auto s = play::replay_transcript(*game, replay_path);
        std::cout << "replayed " << s.transcript.size() << " commands: score " << s.score << "/" << game->max_score()
                  << ", moves " << s.moves << ", " << (s.won ? "won" : "not won") << "\n";
        return 0;
      }
      play::PlayOptions opt;
      opt.show_admissible = show_admissible;
      opt.max_steps = play_steps;
      if (!transcript.empty()) opt.transcript_path = transcript;
      play::play_repl(game, std::cin, std::cout, opt);
      return 0;
    }

    if (*trn || *evl) {
      experiments::ExperimentPlan plan;
      plan.corpus = corpus;
      plan.train_fraction = train_fraction;
      plan.episodes = episodes;
      plan.max_steps = max_steps;
      plan.repeats = repeats;
      plan.seed = seed;
      plan.eval_mode = mode_from(eval_mode);
      plan.check();
      auto games = experiments::load_corpus(corpus);
      if (games.empty()) throw DomainError("no games in " + corpus);

      if (*evl) {
        if (!games_list.empty()) games = experiments::select(games, experiments::read_id_list(games_list));
        std::unique_ptr<experiments::Policy> policy;
        std::optional<agent::Agent> ag;
        if (agent_name == "random") {
          policy = std::make_unique<experiments::RandomPolicy>();
        } else if (agent_name == "oracle") {
          policy = std::make_unique<experiments::OraclePolicy>();
        } else {
          if (checkpoint.empty()) throw DomainError("eval: --checkpoint is required for --agent checkpoint");
          auto [params, vocab] = agent::load_params(checkpoint);
          ag.emplace(std::move(params), std::move(vocab));
          policy = std::make_unique<experiments::AgentPolicy>(*ag, plan.eval_mode);
        }
        auto sum = experiments::evaluate(*policy, games, plan, agent_name);
        print_eval(sum);
        std::cout << std::fixed;
        for (const auto& g : sum.per_game)
          std::cout << "  " << g.game << " " << std::setprecision(3) << g.score << " " << std::setprecision(1) << g.moves
                    << "\n";
        std::cout.unsetf(std::ios::floatfield);
        if (evl->count("--out")) experiments::write_results(out_root, plan, {{sum}, std::nullopt, sum.curve});
        return 0;
      }

      if (!train_list.empty()) plan.train_ids = experiments::read_id_list(train_list);
      if (!eval_list.empty()) plan.eval_ids = experiments::read_id_list(eval_list);
      auto split = experiments::split_corpus(games, plan);
      const fs::path dir = fs::path(out_root) / (run_id.empty() ? "train-s" + std::to_string(seed) : run_id);
      experiments::RunOutput out;
      auto pre = experiments::pretrain(split.train, plan);
      out.curves = pre.curve;
      fs::create_directories(dir);
      agent::save_params(dir / "checkpoint.bin", pre.agent.params(), pre.agent.vocab());
      experiments::RandomPolicy rnd;
      experiments::AgentPolicy pol(pre.agent, plan.eval_mode);
      out.evaluations.push_back(experiments::evaluate(rnd, split.eval, plan, "random"));
      out.evaluations.push_back(experiments::evaluate(pol, split.train, plan, "pretrained-train"));
      out.evaluations.push_back(experiments::evaluate(pol, split.eval, plan, "pretrained-eval"));
      for (const auto& e : out.evaluations) print_eval(e);
      if (!transfer_dir.empty()) {
        auto targets = experiments::load_corpus(transfer_dir);
        auto tplan = plan;
        tplan.episodes = transfer_episodes;
        auto rep = experiments::compare_transfer(pre.agent, targets, tplan);
        std::cout << std::fixed << std::setprecision(2) << "transfer: fresh " << rep.fresh.mean_episodes << " episodes, pretrained "
                  << rep.pretrained.mean_episodes << " episodes (ratio " << rep.episode_ratio << ")\n";
        std::cout.unsetf(std::ios::floatfield);
        for (auto* arm : {&rep.fresh, &rep.pretrained})
          for (const auto& p : arm->curve) out.curves.push_back(p);
        out.transfer = std::move(rep);
      }
      experiments::write_results(dir, plan, out);
      std::cout << "results in " << dir.string() << "\n";
      return 0;
    }

    if (*sts) {
      std::vector<GameSpec> specs;
      for (const auto& f : spec_files(stats_inputs)) specs.push_back(load_spec_file(f.string()));
      std::vector<validator::GameRow> rows;
      auto stats = validator::corpus_stats(specs, &rows);
      std::cout << validator::stats_csv(rows, stats);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
