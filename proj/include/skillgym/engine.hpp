#pragma once

// Deterministic runtime for a GameSpec: world state, command execution,
// reward bookkeeping and admissible-command enumeration.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "skillgym/gamespec.hpp"
#include "skillgym/grammar.hpp"

namespace skillgym::engine {

struct Location {
  enum class Kind : std::uint8_t { room, in, on, inventory, nowhere };
  Kind kind = Kind::room;
  // Room index for Kind::room, holder entity index for in/on, otherwise 0.
  std::uint16_t ref = 0;
  bool operator==(const Location&) const = default;
};

struct EntityState {
  Location location;
  std::uint64_t flags = 0;  // bit i = Game::flag_names()[i]
  bool operator==(const EntityState&) const = default;
};

struct WorldState {
  std::vector<EntityState> entities;  // parallel to spec.entities
  std::uint64_t collected_rewards = 0;
  // Bit i set once Game::tracked_actions()[i] has succeeded.
  std::uint64_t completed_actions = 0;
  int score = 0;
  int moves = 0;
  int penalty = 0;
  bool done = false;
  bool failed = false;

  bool won() const { return done && !failed; }
  bool operator==(const WorldState&) const = default;
};

struct StepResult {
  std::string feedback;
  int score_delta = 0;
  bool done = false;
  bool won = false;
  std::vector<std::string> admissible;
  std::string room_description;
  std::string inventory_text;
};

class EpisodeFinished : public std::logic_error {
 public:
  EpisodeFinished() : std::logic_error("episode already finished") {}
};

// A concrete command string paired with its parsed form.
struct Candidate {
  std::string text;
  Command command;
};

class Game {
 public:
  // The GameSpec should already be valid; throws std::invalid_argument for games
  // that exceed the runtime's fixed limits (64 flags, 64 rewards).
  explicit Game(GameSpec spec);

  const GameSpec& spec() const { return *spec_; }
  int max_score() const { return max_score_; }
  const std::vector<std::string>& flag_names() const { return flag_names_; }
  const std::vector<std::string>& tracked_actions() const { return tracked_; }

  // The seed is accepted for interface stability; games are deterministic.
  WorldState initial_state(std::uint64_t seed = 0) const;
  StepResult intro(const WorldState& state) const;

  // Noun ties prefer held entities, then visible ones.
  Command parse(std::string_view text, const WorldState& state) const;

  // With observe = false only feedback, score_delta, done and won are filled.
  std::pair<WorldState, StepResult> step(const WorldState& state, const Command& cmd, bool observe = true) const;
  // Like step but skips rendering observation text and admissible commands.
  WorldState advance(const WorldState& state, const Command& cmd) const;

  // Every admissible command, unrendered and unsorted.
  std::vector<Command> commands(const WorldState& state) const;
  // Rendered, sorted and duplicate-free.
  std::vector<Candidate> candidates(const WorldState& state) const;
  std::vector<std::string> admissible_commands(const WorldState& state) const;

  std::string room_description(const WorldState& state) const;
  std::string inventory_text(const WorldState& state) const;

  bool visible(const WorldState& state, std::size_t entity) const;
  bool held(const WorldState& state, std::size_t entity) const;
  bool has_flag(const WorldState& state, std::size_t entity, std::string_view flag) const;

  // Canonical encoding of everything except moves and text; equal keys mean
  // equivalent states.
  std::string state_key(const WorldState& state) const;
  std::uint64_t state_hash(const WorldState& state) const;

 private:
  struct Outcome {
    std::string text;
    bool success = false;
  };
  using Bindings = std::vector<std::pair<std::string, std::size_t>>;
  struct CustomShape {
    std::vector<TemplatePart> slots;
    std::optional<std::string> preposition;
  };

  std::shared_ptr<const GameSpec> spec_;
  std::shared_ptr<const CommandGrammar> grammar_;
  std::vector<std::string> flag_names_;
  std::vector<std::string> tracked_;
  std::vector<Location> initial_locations_;
  std::vector<CustomShape> shapes_;
  int max_score_ = 0;

  int flag_bit(std::string_view flag) const;
  std::size_t entity_of(const std::string& name) const;
  std::optional<std::size_t> bound(const std::string& ref, const Bindings& b) const;
  std::optional<Location> resolve_location(const std::string& loc, const Bindings& b) const;
  bool eval(const WorldState& s, const Predicate& p, const Bindings& b) const;
  void set_flag(WorldState& s, std::size_t e, const std::string& flag, bool value) const;
  bool inside(const WorldState& s, std::size_t e, std::size_t holder) const;
  std::string state_tags(const WorldState& s, std::size_t e) const;

  Outcome run(WorldState& s, const Command& cmd, bool verbose) const;
  Outcome run_custom(WorldState& s, const CustomAction& act, const Command& cmd) const;
  int apply(WorldState& s, const Command& cmd, Outcome& out, bool verbose) const;
};

// One transcript line: {moves, command, feedback, score, done}.
struct TranscriptRecord {
  int moves = 0;
  std::string command;
  std::string feedback;
  int score = 0;
  bool done = false;
  bool operator==(const TranscriptRecord&) const = default;
};

std::string to_jsonl(const TranscriptRecord& rec);
void write_transcript(std::ostream& out, const std::vector<TranscriptRecord>& records);
std::vector<TranscriptRecord> read_transcript(std::istream& in);

// Replays commands from the initial state. Unparseable commands consume a
// move, matching the environment's behaviour.
WorldState replay(const Game& game, const std::vector<std::string>& commands, std::uint64_t seed = 0);

}  // namespace skillgym::engine
