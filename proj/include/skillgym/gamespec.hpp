#pragma once

// Declarative game definition: the exchange format between the generator,
// the runtime, the validator and the training stack.

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace skillgym {

enum class EntityKind { portable, fixture, container, supporter, device };

enum class Relation { has_flag, in_location, in_inventory, action_completed };

enum class EffectOp { set_flag, clear_flag, move, consume };

std::string_view to_string(EntityKind k);
std::string_view to_string(Relation r);
std::string_view to_string(EffectOp op);
std::optional<EntityKind> entity_kind_from(std::string_view s);
std::optional<Relation> relation_from(std::string_view s);
std::optional<EffectOp> effect_op_from(std::string_view s);

// Built-in verbs the runtime knows how to execute.
inline const std::vector<std::string>& default_verbs() {
  static const std::vector<std::string> verbs = {
      "look", "examine", "inventory", "take",    "drop",    "open",
      "close", "put-in", "put-on",    "turn-on", "turn-off"};
  return verbs;
}
bool is_default_verb(std::string_view verb);

// Flags with engine-defined meaning. Anything else is a custom flag.
inline const std::vector<std::string>& standard_flags() {
  static const std::vector<std::string> flags = {
      "openable", "open",   "closed", "switchable", "on",
      "off",      "edible", "filled", "empty",      "portable"};
  return flags;
}
bool is_standard_flag(std::string_view flag);

struct Room {
  std::string name;
  std::string description;
  bool operator==(const Room&) const = default;
};

struct Entity {
  std::string name;
  EntityKind kind = EntityKind::fixture;
  // A room name, "in <container>" or "on <supporter>".
  std::string location;
  std::map<std::string, bool> properties;
  std::string description;

  bool has(std::string_view flag) const;
  // Carryable either by kind or through the `portable` property.
  bool carryable() const;
  bool operator==(const Entity&) const = default;
};

struct Predicate {
  // Entity name, slot reference ("<container>") or empty for action_completed.
  std::string subject;
  Relation relation = Relation::has_flag;
  // Flag name, location, or action instance depending on the relation.
  std::string argument;
  bool negated = false;
  bool operator==(const Predicate&) const = default;
};

struct Effect {
  EffectOp op = EffectOp::set_flag;
  std::string subject;
  // Flag for set/clear, destination location for move, unused for consume.
  std::string argument;
  bool operator==(const Effect&) const = default;
};

struct CustomAction {
  std::string name;
  std::string template_text;
  std::vector<std::string> aliases;
  std::vector<Predicate> preconditions;
  std::vector<Effect> effects;
  std::string success_text;
  std::string failure_text;
  // Fatal actions end the episode as a loss.
  bool fatal = false;
  int penalty = 0;
  bool operator==(const CustomAction&) const = default;
};

struct Reward {
  Predicate trigger;
  int value = 1;
  bool once_only = true;
  bool operator==(const Reward&) const = default;
};

struct TaskGraph {
  std::vector<std::string> nodes;
  std::vector<std::pair<std::string, std::string>> edges;
  std::vector<std::vector<std::string>> parallel_groups;
  bool operator==(const TaskGraph&) const = default;
};

struct GameSpec {
  std::string id;
  std::string title;
  std::string goal_text;
  std::vector<Room> rooms;
  std::vector<Entity> entities;
  std::vector<CustomAction> custom_actions;
  std::set<std::string> default_actions;
  std::vector<Reward> rewards;
  TaskGraph task_graph;
  int max_steps_hint = 50;

  const Entity* find_entity(std::string_view name) const;
  std::optional<std::size_t> entity_index(std::string_view name) const;
  const CustomAction* find_action(std::string_view name) const;
  bool verb_enabled(std::string_view verb) const { return default_actions.count(std::string(verb)) > 0; }
  bool operator==(const GameSpec&) const = default;
};

enum class ViolationKind {
  malformed_json,
  schema,
  dangling_reference,
  uniqueness,
  self_containment,
  flag_conflict,
  slot_usage,
  undeclared_flag,
  arity,
  reward,
  task_graph,
};
std::string_view to_string(ViolationKind k);

struct Violation {
  ViolationKind kind = ViolationKind::schema;
  std::string path;
  std::string message;
  // The offending name for reference/uniqueness errors.
  std::string name;
};

// Thrown by parse_spec with every problem found.
class SpecError : public std::runtime_error {
 public:
  explicit SpecError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }
  bool has(ViolationKind k) const;

 private:
  std::vector<Violation> violations_;
};

class UnsupportedConstruct : public std::runtime_error {
 public:
  explicit UnsupportedConstruct(std::string name);
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

// Structural decode only (JSON shape and enum values); names are lower-cased.
// Throws SpecError carrying malformed_json or schema violations.
GameSpec parse_spec_unchecked(std::string_view json_text);

// Structural decode followed by validate_schema; throws SpecError on any
// violation. Dangling references are reported with kind dangling_reference.
GameSpec parse_spec(std::string_view json_text);

GameSpec load_spec_file(const std::string& path);

// Canonical JSON (two-space indent, fixed key order). parse_spec inverts it.
std::string serialize_spec(const GameSpec& spec);

std::vector<Violation> validate_schema(const GameSpec& spec);

int max_score(const GameSpec& spec);

// Inform 7 source for the game. Throws UnsupportedConstruct for custom flags
// that have no Inform 7 spelling.
std::string emit_inform7(const GameSpec& spec);

// Location strings: a room name, "in X" or "on X".
struct LocationRef {
  enum class Kind { room, in, on } kind = Kind::room;
  std::string target;
};
LocationRef parse_location(std::string_view loc);

// Every flag a game can ever set or test: standard flags plus custom flags
// named in entity properties or effects.
std::set<std::string> declared_flags(const GameSpec& spec);

}  // namespace skillgym
