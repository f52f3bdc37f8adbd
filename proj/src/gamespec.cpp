#include "skillgym/gamespec.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "skillgym/grammar.hpp"
#include "skillgym/text.hpp"

namespace skillgym {

using ojson = nlohmann::ordered_json;

std::string_view to_string(EntityKind k) {
  switch (k) {
    case EntityKind::portable: return "portable";
    case EntityKind::fixture: return "fixture";
    case EntityKind::container: return "container";
    case EntityKind::supporter: return "supporter";
    case EntityKind::device: return "device";
  }
  return "fixture";
}

std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::has_flag: return "has_flag";
    case Relation::in_location: return "in_location";
    case Relation::in_inventory: return "in_inventory";
    case Relation::action_completed: return "action_completed";
  }
  return "has_flag";
}

std::string_view to_string(EffectOp op) {
  switch (op) {
    case EffectOp::set_flag: return "set";
    case EffectOp::clear_flag: return "clear";
    case EffectOp::move: return "move";
    case EffectOp::consume: return "consume";
  }
  return "set";
}

std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::malformed_json: return "malformed_json";
    case ViolationKind::schema: return "schema";
    case ViolationKind::dangling_reference: return "dangling_reference";
    case ViolationKind::uniqueness: return "uniqueness";
    case ViolationKind::self_containment: return "self_containment";
    case ViolationKind::flag_conflict: return "flag_conflict";
    case ViolationKind::slot_usage: return "slot_usage";
    case ViolationKind::undeclared_flag: return "undeclared_flag";
    case ViolationKind::arity: return "arity";
    case ViolationKind::reward: return "reward";
    case ViolationKind::task_graph: return "task_graph";
  }
  return "schema";
}

std::optional<EntityKind> entity_kind_from(std::string_view s) {
  for (auto k : {EntityKind::portable, EntityKind::fixture, EntityKind::container, EntityKind::supporter,
                 EntityKind::device})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

std::optional<Relation> relation_from(std::string_view s) {
  for (auto r : {Relation::has_flag, Relation::in_location, Relation::in_inventory, Relation::action_completed})
    if (to_string(r) == s) return r;
  return std::nullopt;
}

std::optional<EffectOp> effect_op_from(std::string_view s) {
  for (auto op : {EffectOp::set_flag, EffectOp::clear_flag, EffectOp::move, EffectOp::consume})
    if (to_string(op) == s) return op;
  return std::nullopt;
}

bool is_default_verb(std::string_view verb) {
  const auto& v = default_verbs();
  return std::find(v.begin(), v.end(), verb) != v.end();
}

bool is_standard_flag(std::string_view flag) {
  const auto& f = standard_flags();
  return std::find(f.begin(), f.end(), flag) != f.end();
}

bool Entity::has(std::string_view flag) const {
  auto it = properties.find(std::string(flag));
  return it != properties.end() && it->second;
}

bool Entity::carryable() const { return kind == EntityKind::portable || has("portable"); }

namespace {

// Stored names are already lower-case; only the query needs folding.
bool same_name(std::string_view stored, std::string_view query) {
  return stored.size() == query.size() &&
         std::equal(stored.begin(), stored.end(), query.begin(), [](char a, char b) {
           return a == static_cast<char>(std::tolower(static_cast<unsigned char>(b)));
         });
}

}  // namespace

const Entity* GameSpec::find_entity(std::string_view name) const {
  for (const auto& e : entities)
    if (same_name(e.name, name)) return &e;
  return nullptr;
}

std::optional<std::size_t> GameSpec::entity_index(std::string_view name) const {
  for (std::size_t i = 0; i < entities.size(); ++i)
    if (same_name(entities[i].name, name)) return i;
  return std::nullopt;
}

const CustomAction* GameSpec::find_action(std::string_view name) const {
  for (const auto& a : custom_actions)
    if (same_name(a.name, name)) return &a;
  return nullptr;
}

SpecError::SpecError(std::vector<Violation> violations)
    : std::runtime_error([&] {
        std::string msg = "invalid game spec";
        for (const auto& v : violations) msg += "\n  " + v.path + ": " + v.message;
        return msg;
      }()),
      violations_(std::move(violations)) {}

bool SpecError::has(ViolationKind k) const {
  return std::any_of(violations_.begin(), violations_.end(), [k](const Violation& v) { return v.kind == k; });
}

UnsupportedConstruct::UnsupportedConstruct(std::string name)
    : std::runtime_error("no Inform 7 mapping for: " + name), name_(std::move(name)) {}

LocationRef parse_location(std::string_view loc) {
  std::string s = text::trim(loc);
  if (s.rfind("in ", 0) == 0) return {LocationRef::Kind::in, text::trim(s.substr(3))};
  if (s.rfind("on ", 0) == 0) return {LocationRef::Kind::on, text::trim(s.substr(3))};
  return {LocationRef::Kind::room, s};
}

// ---------------------------------------------------------------------------
// Structural decode

namespace {

class Decoder {
 public:
  std::vector<Violation> errors;

  void fail(const std::string& path, const std::string& msg) {
    errors.push_back({ViolationKind::schema, path, msg, ""});
  }

  const ojson* field(const ojson& obj, const std::string& key, const std::string& path, bool required) {
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) fail(path + "." + key, "missing required field");
      return nullptr;
    }
    return &*it;
  }

  std::string str(const ojson& obj, const std::string& key, const std::string& path, bool required,
                  bool lower) {
    const auto* v = field(obj, key, path, required);
    if (!v) return {};
    if (!v->is_string()) {
      fail(path + "." + key, "expected string");
      return {};
    }
    auto s = text::trim(v->get<std::string>());
    return lower ? text::to_lower(s) : s;
  }

  std::vector<std::string> str_list(const ojson& obj, const std::string& key, const std::string& path,
                                    bool lower) {
    std::vector<std::string> out;
    const auto* v = field(obj, key, path, false);
    if (!v) return out;
    if (!v->is_array()) {
      fail(path + "." + key, "expected array of strings");
      return out;
    }
    for (std::size_t i = 0; i < v->size(); ++i) {
      const auto& item = (*v)[i];
      if (!item.is_string()) {
        fail(path + "." + key + "[" + std::to_string(i) + "]", "expected string");
        continue;
      }
      auto s = text::trim(item.get<std::string>());
      out.push_back(lower ? text::to_lower(s) : s);
    }
    return out;
  }

  const ojson* array(const ojson& obj, const std::string& key, const std::string& path, bool required) {
    const auto* v = field(obj, key, path, required);
    if (!v) return nullptr;
    if (!v->is_array()) {
      fail(path + "." + key, "expected array");
      return nullptr;
    }
    return v;
  }

  Predicate predicate(const ojson& j, const std::string& path) {
    Predicate p;
    if (!j.is_object()) {
      fail(path, "expected object");
      return p;
    }
    p.subject = str(j, "subject", path, false, true);
    auto rel = str(j, "relation", path, true, true);
    if (auto r = relation_from(rel))
      p.relation = *r;
    else if (!rel.empty())
      fail(path + ".relation", "unknown relation '" + rel + "'");
    p.argument = str(j, "argument", path, false, true);
    if (auto it = j.find("negated"); it != j.end()) {
      if (it->is_boolean())
        p.negated = it->get<bool>();
      else
        fail(path + ".negated", "expected boolean");
    }
    return p;
  }

  Effect effect(const ojson& j, const std::string& path) {
    Effect e;
    if (!j.is_object()) {
      fail(path, "expected object");
      return e;
    }
    auto op = str(j, "op", path, true, true);
    if (auto o = effect_op_from(op))
      e.op = *o;
    else if (!op.empty())
      fail(path + ".op", "unknown effect op '" + op + "'");
    e.subject = str(j, "subject", path, true, true);
    if (e.op == EffectOp::set_flag || e.op == EffectOp::clear_flag)
      e.argument = str(j, "flag", path, true, true);
    else if (e.op == EffectOp::move)
      e.argument = str(j, "to", path, true, true);
    return e;
  }

  int integer(const ojson& obj, const std::string& key, const std::string& path, int fallback) {
    const auto* v = field(obj, key, path, false);
    if (!v) return fallback;
    if (!v->is_number_integer()) {
      fail(path + "." + key, "expected integer");
      return fallback;
    }
    return v->get<int>();
  }

  bool boolean(const ojson& obj, const std::string& key, const std::string& path, bool fallback) {
    const auto* v = field(obj, key, path, false);
    if (!v) return fallback;
    if (!v->is_boolean()) {
      fail(path + "." + key, "expected boolean");
      return fallback;
    }
    return v->get<bool>();
  }

  GameSpec decode(const ojson& root) {
    GameSpec spec;
    if (!root.is_object()) {
      fail("$", "top level must be an object");
      return spec;
    }
    spec.id = str(root, "id", "$", true, false);
    spec.title = str(root, "title", "$", false, false);
    if (spec.title.empty()) spec.title = spec.id;
    spec.goal_text = str(root, "goal", "$", true, false);
    spec.max_steps_hint = integer(root, "max_steps", "$", 50);

    if (const auto* rooms = array(root, "rooms", "$", true)) {
      for (std::size_t i = 0; i < rooms->size(); ++i) {
        const auto& r = (*rooms)[i];
        std::string path = "$.rooms[" + std::to_string(i) + "]";
        if (!r.is_object()) {
          fail(path, "expected object");
          continue;
        }
        spec.rooms.push_back({str(r, "name", path, true, true), str(r, "description", path, false, false)});
      }
    }

    if (const auto* ents = array(root, "entities", "$", true)) {
      for (std::size_t i = 0; i < ents->size(); ++i) {
        const auto& j = (*ents)[i];
        std::string path = "$.entities[" + std::to_string(i) + "]";
        if (!j.is_object()) {
          fail(path, "expected object");
          continue;
        }
        Entity e;
        e.name = str(j, "name", path, true, true);
        auto kind = str(j, "kind", path, true, true);
        if (auto k = entity_kind_from(kind))
          e.kind = *k;
        else if (!kind.empty())
          fail(path + ".kind", "unknown entity kind '" + kind + "'");
        e.location = str(j, "location", path, true, true);
        e.description = str(j, "description", path, false, false);
        if (const auto* props = field(j, "properties", path, false)) {
          if (!props->is_object()) {
            fail(path + ".properties", "expected object of flag -> boolean");
          } else {
            for (auto it = props->begin(); it != props->end(); ++it) {
              if (!it.value().is_boolean()) {
                fail(path + ".properties." + it.key(), "expected boolean");
                continue;
              }
              e.properties[text::to_lower(text::trim(it.key()))] = it.value().get<bool>();
            }
          }
        }
        spec.entities.push_back(std::move(e));
      }
    }

    if (const auto* actions = field(root, "actions", "$", false)) {
      if (!actions->is_object()) {
        fail("$.actions", "expected object with 'default' and 'custom'");
      } else {
        for (auto& v : str_list(*actions, "default", "$.actions", true)) spec.default_actions.insert(v);
        if (const auto* custom = array(*actions, "custom", "$.actions", false)) {
          for (std::size_t i = 0; i < custom->size(); ++i) {
            const auto& j = (*custom)[i];
            std::string path = "$.actions.custom[" + std::to_string(i) + "]";
            if (!j.is_object()) {
              fail(path, "expected object");
              continue;
            }
            CustomAction a;
            a.name = str(j, "name", path, true, true);
            a.template_text = str(j, "template", path, true, true);
            a.aliases = str_list(j, "aliases", path, true);
            if (const auto* pre = array(j, "preconditions", path, false))
              for (std::size_t k = 0; k < pre->size(); ++k)
                a.preconditions.push_back(predicate((*pre)[k], path + ".preconditions[" + std::to_string(k) + "]"));
            if (const auto* eff = array(j, "effects", path, false))
              for (std::size_t k = 0; k < eff->size(); ++k)
                a.effects.push_back(effect((*eff)[k], path + ".effects[" + std::to_string(k) + "]"));
            a.success_text = str(j, "success", path, false, false);
            a.failure_text = str(j, "failure", path, false, false);
            a.fatal = boolean(j, "fatal", path, false);
            a.penalty = integer(j, "penalty", path, 0);
            spec.custom_actions.push_back(std::move(a));
          }
        }
      }
    }

    if (const auto* rewards = array(root, "rewards", "$", true)) {
      for (std::size_t i = 0; i < rewards->size(); ++i) {
        const auto& j = (*rewards)[i];
        std::string path = "$.rewards[" + std::to_string(i) + "]";
        if (!j.is_object()) {
          fail(path, "expected object");
          continue;
        }
        Reward r;
        if (const auto* trig = field(j, "trigger", path, true)) r.trigger = predicate(*trig, path + ".trigger");
        r.value = integer(j, "value", path, 1);
        r.once_only = boolean(j, "once", path, true);
        spec.rewards.push_back(std::move(r));
      }
    }

    if (const auto* tg = field(root, "task_graph", "$", false)) {
      if (!tg->is_object()) {
        fail("$.task_graph", "expected object");
      } else {
        spec.task_graph.nodes = str_list(*tg, "nodes", "$.task_graph", true);
        if (const auto* edges = array(*tg, "edges", "$.task_graph", false)) {
          for (std::size_t i = 0; i < edges->size(); ++i) {
            const auto& e = (*edges)[i];
            if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
              fail("$.task_graph.edges[" + std::to_string(i) + "]", "expected [before, after]");
              continue;
            }
            spec.task_graph.edges.emplace_back(text::to_lower(text::trim(e[0].get<std::string>())),
                                               text::to_lower(text::trim(e[1].get<std::string>())));
          }
        }
        if (const auto* groups = array(*tg, "parallel_groups", "$.task_graph", false)) {
          for (std::size_t i = 0; i < groups->size(); ++i) {
            const auto& g = (*groups)[i];
            std::vector<std::string> members;
            if (!g.is_array()) {
              fail("$.task_graph.parallel_groups[" + std::to_string(i) + "]", "expected array");
              continue;
            }
            for (const auto& m : g)
              if (m.is_string()) members.push_back(text::to_lower(text::trim(m.get<std::string>())));
            spec.task_graph.parallel_groups.push_back(std::move(members));
          }
        }
      }
    }
    return spec;
  }
};

ojson encode_predicate(const Predicate& p) {
  ojson j;
  if (!p.subject.empty()) j["subject"] = p.subject;
  j["relation"] = std::string(to_string(p.relation));
  if (!p.argument.empty()) j["argument"] = p.argument;
  if (p.negated) j["negated"] = true;
  return j;
}

ojson encode_effect(const Effect& e) {
  ojson j;
  j["op"] = std::string(to_string(e.op));
  j["subject"] = e.subject;
  if (e.op == EffectOp::set_flag || e.op == EffectOp::clear_flag) j["flag"] = e.argument;
  if (e.op == EffectOp::move) j["to"] = e.argument;
  return j;
}

}  // namespace

GameSpec parse_spec_unchecked(std::string_view json_text) {
  ojson root;
  try {
    root = ojson::parse(json_text.begin(), json_text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw SpecError({{ViolationKind::malformed_json, "$", e.what(), ""}});
  }
  Decoder d;
  GameSpec spec = d.decode(root);
  if (!d.errors.empty()) throw SpecError(std::move(d.errors));
  return spec;
}

GameSpec parse_spec(std::string_view json_text) {
  GameSpec spec = parse_spec_unchecked(json_text);
  auto violations = validate_schema(spec);
  if (!violations.empty()) throw SpecError(std::move(violations));
  return spec;
}

GameSpec load_spec_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str());
}

std::string serialize_spec(const GameSpec& spec) {
  ojson root;
  root["id"] = spec.id;
  root["title"] = spec.title;
  root["goal"] = spec.goal_text;
  root["rooms"] = ojson::array();
  for (const auto& r : spec.rooms) root["rooms"].push_back({{"name", r.name}, {"description", r.description}});
  root["entities"] = ojson::array();
  for (const auto& e : spec.entities) {
    ojson j;
    j["name"] = e.name;
    j["kind"] = std::string(to_string(e.kind));
    j["location"] = e.location;
    j["properties"] = ojson::object();
    for (const auto& [k, v] : e.properties) j["properties"][k] = v;
    j["description"] = e.description;
    root["entities"].push_back(std::move(j));
  }
  ojson actions;
  actions["default"] = ojson::array();
  for (const auto& v : spec.default_actions) actions["default"].push_back(v);
  actions["custom"] = ojson::array();
  for (const auto& a : spec.custom_actions) {
    ojson j;
    j["name"] = a.name;
    j["template"] = a.template_text;
    j["aliases"] = a.aliases;
    j["preconditions"] = ojson::array();
    for (const auto& p : a.preconditions) j["preconditions"].push_back(encode_predicate(p));
    j["effects"] = ojson::array();
    for (const auto& e : a.effects) j["effects"].push_back(encode_effect(e));
    j["success"] = a.success_text;
    j["failure"] = a.failure_text;
    if (a.fatal) j["fatal"] = true;
    if (a.penalty != 0) j["penalty"] = a.penalty;
    actions["custom"].push_back(std::move(j));
  }
  root["actions"] = std::move(actions);
  root["rewards"] = ojson::array();
  for (const auto& r : spec.rewards)
    root["rewards"].push_back({{"trigger", encode_predicate(r.trigger)}, {"value", r.value}, {"once", r.once_only}});
  ojson tg;
  tg["nodes"] = spec.task_graph.nodes;
  tg["edges"] = ojson::array();
  for (const auto& [a, b] : spec.task_graph.edges) tg["edges"].push_back(ojson::array({a, b}));
  tg["parallel_groups"] = spec.task_graph.parallel_groups;
  root["task_graph"] = std::move(tg);
  root["max_steps"] = spec.max_steps_hint;
  return root.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Semantic validation

std::set<std::string> declared_flags(const GameSpec& spec) {
  std::set<std::string> flags(standard_flags().begin(), standard_flags().end());
  for (const auto& e : spec.entities)
    for (const auto& [k, v] : e.properties) flags.insert(k);
  for (const auto& a : spec.custom_actions)
    for (const auto& eff : a.effects)
      if (eff.op == EffectOp::set_flag || eff.op == EffectOp::clear_flag) flags.insert(eff.argument);
  return flags;
}

namespace {

bool valid_flag_name(const std::string& f) {
  if (f.empty() || !std::islower(static_cast<unsigned char>(f[0]))) return false;
  return std::all_of(f.begin(), f.end(), [](char c) {
    return std::islower(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) ||
           c == '_' || c == '-';
  });
}

bool is_slot_ref(const std::string& s) { return s.size() > 2 && s.front() == '<' && s.back() == '>'; }

class Validator {
 public:
  explicit Validator(const GameSpec& spec) : spec_(spec), flags_(declared_flags(spec)) {}

  std::vector<Violation> run() {
    check_top();
    check_rooms();
    check_entities();
    check_actions();
    check_rewards();
    check_task_graph();
    return std::move(out_);
  }

 private:
  const GameSpec& spec_;
  std::set<std::string> flags_;
  std::vector<Violation> out_;

  void add(ViolationKind k, std::string path, std::string msg, std::string name = {}) {
    out_.push_back({k, std::move(path), std::move(msg), std::move(name)});
  }

  bool is_room(const std::string& n) const {
    return std::any_of(spec_.rooms.begin(), spec_.rooms.end(), [&](const Room& r) { return r.name == n; });
  }

  void check_top() {
    if (spec_.id.empty()) add(ViolationKind::schema, "$.id", "id must be non-empty");
    if (spec_.goal_text.empty()) add(ViolationKind::schema, "$.goal", "goal must be non-empty");
    if (spec_.max_steps_hint < 1) add(ViolationKind::schema, "$.max_steps", "max_steps must be positive");
    for (const auto& v : spec_.default_actions)
      if (!is_default_verb(v)) add(ViolationKind::schema, "$.actions.default", "unknown built-in verb '" + v + "'", v);
  }

  void check_rooms() {
    if (spec_.rooms.empty()) add(ViolationKind::schema, "$.rooms", "at least one room is required");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < spec_.rooms.size(); ++i) {
      const auto& r = spec_.rooms[i];
      auto path = "$.rooms[" + std::to_string(i) + "]";
      if (r.name.empty()) add(ViolationKind::schema, path + ".name", "room name must be non-empty");
      if (!seen.insert(r.name).second)
        add(ViolationKind::uniqueness, path + ".name", "duplicate room '" + r.name + "'", r.name);
    }
  }

  // Checks "room" / "in X" / "on X" (and "inventory" when allowed) with optional
  // slot references resolved against `slots`.
  void check_location(const std::string& loc, const std::string& path, const std::set<std::string>* slots,
                      bool allow_inventory) {
    if (allow_inventory && loc == "inventory") return;
    auto ref = parse_location(loc);
    if (ref.kind == LocationRef::Kind::room) {
      if (loc.empty())
        add(ViolationKind::schema, path, "empty location");
      else if (!is_room(ref.target))
        add(ViolationKind::dangling_reference, path, "unknown room '" + ref.target + "'", ref.target);
      return;
    }
    if (is_slot_ref(ref.target)) {
      if (!slots || !slots->count(ref.target.substr(1, ref.target.size() - 2)))
        add(ViolationKind::slot_usage, path, "unknown slot " + ref.target, ref.target);
      return;
    }
    const auto* holder = spec_.find_entity(ref.target);
    if (!holder) {
      add(ViolationKind::dangling_reference, path, "unknown entity '" + ref.target + "'", ref.target);
      return;
    }
    if (ref.kind == LocationRef::Kind::in && holder->kind != EntityKind::container)
      add(ViolationKind::schema, path, "'" + ref.target + "' is not a container");
    if (ref.kind == LocationRef::Kind::on && holder->kind != EntityKind::supporter)
      add(ViolationKind::schema, path, "'" + ref.target + "' is not a supporter");
  }

  void check_entities() {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < spec_.entities.size(); ++i) {
      const auto& e = spec_.entities[i];
      auto path = "$.entities[" + std::to_string(i) + "]";
      if (e.name.empty()) add(ViolationKind::schema, path + ".name", "entity name must be non-empty");
      if (!seen.insert(text::to_lower(e.name)).second)
        add(ViolationKind::uniqueness, path + ".name", "duplicate entity '" + e.name + "'", e.name);
      check_location(e.location, path + ".location", nullptr, false);
      for (const auto& [flag, value] : e.properties)
        if (!valid_flag_name(flag)) add(ViolationKind::schema, path + ".properties", "bad flag name '" + flag + "'", flag);
      if (e.has("openable") && (e.has("open") == e.has("closed")))
        add(ViolationKind::flag_conflict, path + ".properties", "openable needs exactly one of open/closed", e.name);
      if (e.has("switchable") && (e.has("on") == e.has("off")))
        add(ViolationKind::flag_conflict, path + ".properties", "switchable needs exactly one of on/off", e.name);
    }
    // Containment cycles.
    for (std::size_t i = 0; i < spec_.entities.size(); ++i) {
      std::set<std::string> chain{spec_.entities[i].name};
      const Entity* cur = &spec_.entities[i];
      for (;;) {
        auto ref = parse_location(cur->location);
        if (ref.kind == LocationRef::Kind::room) break;
        if (ref.target == spec_.entities[i].name) {
          add(ViolationKind::self_containment, "$.entities[" + std::to_string(i) + "].location",
              "'" + spec_.entities[i].name + "' contains itself", spec_.entities[i].name);
          break;
        }
        const Entity* next = spec_.find_entity(ref.target);
        if (!next || !chain.insert(next->name).second) break;
        cur = next;
      }
    }
  }

  void check_predicate(const Predicate& p, const std::string& path, const std::set<std::string>* slots) {
    auto check_subject = [&](bool required) {
      if (p.subject.empty()) {
        if (required) add(ViolationKind::arity, path + ".subject", "relation requires a subject");
        return;
      }
      if (is_slot_ref(p.subject)) {
        if (!slots || !slots->count(p.subject.substr(1, p.subject.size() - 2)))
          add(ViolationKind::slot_usage, path + ".subject", "unknown slot " + p.subject, p.subject);
      } else if (!spec_.find_entity(p.subject)) {
        add(ViolationKind::dangling_reference, path + ".subject", "unknown entity '" + p.subject + "'", p.subject);
      }
    };
    switch (p.relation) {
      case Relation::has_flag:
        check_subject(true);
        if (p.argument.empty())
          add(ViolationKind::arity, path + ".argument", "has_flag requires a flag name");
        else if (!flags_.count(p.argument))
          add(ViolationKind::undeclared_flag, path + ".argument", "flag '" + p.argument + "' is never declared",
              p.argument);
        break;
      case Relation::in_location:
        check_subject(true);
        if (p.argument.empty())
          add(ViolationKind::arity, path + ".argument", "in_location requires a location");
        else
          check_location(p.argument, path + ".argument", slots, true);
        break;
      case Relation::in_inventory:
        check_subject(true);
        if (!p.argument.empty()) add(ViolationKind::arity, path + ".argument", "in_inventory takes no argument");
        break;
      case Relation::action_completed:
        if (!p.subject.empty()) add(ViolationKind::arity, path + ".subject", "action_completed takes no subject");
        if (p.argument.empty()) {
          add(ViolationKind::arity, path + ".argument", "action_completed requires an action");
        } else {
          check_action_instance(p.argument, path + ".argument");
        }
        break;
    }
  }

  void check_action_instance(const std::string& action, const std::string& path) {
    try {
      auto cmd = parse_command_text(action, spec_);
      if (render_command(cmd, spec_) != action)
        add(ViolationKind::dangling_reference, path,
            "'" + action + "' is not in canonical form ('" + render_command(cmd, spec_) + "')", action);
    } catch (const ParseError& e) {
      auto kind = e.kind() == ParseErrorKind::unknown_verb ? ViolationKind::dangling_reference
                                                            : ViolationKind::dangling_reference;
      add(kind, path, "'" + action + "' does not name an action: " + e.what(),
          e.phrase().empty() ? action : e.phrase());
    }
  }

  void check_actions() {
    std::set<std::string> names;
    for (std::size_t i = 0; i < spec_.custom_actions.size(); ++i) {
      const auto& a = spec_.custom_actions[i];
      auto path = "$.actions.custom[" + std::to_string(i) + "]";
      if (a.name.empty()) add(ViolationKind::schema, path + ".name", "action name must be non-empty");
      if (!names.insert(a.name).second)
        add(ViolationKind::uniqueness, path + ".name", "duplicate action '" + a.name + "'", a.name);
      if (is_default_verb(a.name))
        add(ViolationKind::uniqueness, path + ".name", "'" + a.name + "' shadows a built-in verb", a.name);
      std::set<std::string> slots;
      try {
        for (const auto& s : template_slots(a.template_text)) slots.insert(s.text);
        for (const auto& alias : a.aliases) {
          std::set<std::string> alias_slots;
          for (const auto& s : template_slots(alias)) alias_slots.insert(s.text);
          if (alias_slots != slots)
            add(ViolationKind::slot_usage, path + ".aliases", "alias '" + alias + "' must use the template's slots");
        }
      } catch (const std::invalid_argument& e) {
        add(ViolationKind::schema, path + ".template", e.what());
        continue;
      }
      for (std::size_t k = 0; k < a.preconditions.size(); ++k)
        check_predicate(a.preconditions[k], path + ".preconditions[" + std::to_string(k) + "]", &slots);
      for (std::size_t k = 0; k < a.effects.size(); ++k) {
        const auto& e = a.effects[k];
        auto epath = path + ".effects[" + std::to_string(k) + "]";
        if (is_slot_ref(e.subject)) {
          if (!slots.count(e.subject.substr(1, e.subject.size() - 2)))
            add(ViolationKind::slot_usage, epath + ".subject", "unknown slot " + e.subject, e.subject);
        } else if (!spec_.find_entity(e.subject)) {
          add(ViolationKind::dangling_reference, epath + ".subject", "unknown entity '" + e.subject + "'", e.subject);
        }
        if ((e.op == EffectOp::set_flag || e.op == EffectOp::clear_flag) && !valid_flag_name(e.argument))
          add(ViolationKind::schema, epath + ".flag", "bad flag name '" + e.argument + "'");
        if (e.op == EffectOp::move) check_location(e.argument, epath + ".to", &slots, true);
      }
      for (const auto& s : slots) {
        const std::string ref = "<" + s + ">";
        auto mentions = [&](const std::string& str) { return str == ref || str.find(ref) != std::string::npos; };
        bool used = std::any_of(a.preconditions.begin(), a.preconditions.end(),
                                [&](const Predicate& p) { return mentions(p.subject) || mentions(p.argument); }) ||
                    std::any_of(a.effects.begin(), a.effects.end(),
                                [&](const Effect& e) { return mentions(e.subject) || mentions(e.argument); });
        if (!used)
          add(ViolationKind::slot_usage, path + ".template", "slot " + ref + " is never used by a precondition or effect", s);
      }
      if (a.penalty < 0) add(ViolationKind::schema, path + ".penalty", "penalty is a non-negative magnitude");
    }
  }

  void check_rewards() {
    if (spec_.rewards.empty()) add(ViolationKind::reward, "$.rewards", "at least one reward is required");
    long total = 0;
    for (std::size_t i = 0; i < spec_.rewards.size(); ++i) {
      const auto& r = spec_.rewards[i];
      auto path = "$.rewards[" + std::to_string(i) + "]";
      if (r.value < 1) add(ViolationKind::reward, path + ".value", "reward value must be >= 1");
      if (!r.once_only) add(ViolationKind::reward, path + ".once", "only once-only rewards are supported");
      total += r.value;
      check_predicate(r.trigger, path + ".trigger", nullptr);
    }
    if (!spec_.rewards.empty() && total <= 0) add(ViolationKind::reward, "$.rewards", "total reward must be positive");
  }

  void check_task_graph() {
    const auto& tg = spec_.task_graph;
    std::set<std::string> nodes;
    for (std::size_t i = 0; i < tg.nodes.size(); ++i) {
      auto path = "$.task_graph.nodes[" + std::to_string(i) + "]";
      if (!nodes.insert(tg.nodes[i]).second)
        add(ViolationKind::uniqueness, path, "task node '" + tg.nodes[i] + "' listed twice", tg.nodes[i]);
      std::size_t before = out_.size();
      check_action_instance(tg.nodes[i], path);
      for (std::size_t k = before; k < out_.size(); ++k) out_[k].kind = ViolationKind::task_graph;
    }
    std::map<std::string, std::vector<std::string>> adj;
    for (std::size_t i = 0; i < tg.edges.size(); ++i) {
      const auto& [a, b] = tg.edges[i];
      auto path = "$.task_graph.edges[" + std::to_string(i) + "]";
      if (!nodes.count(a)) add(ViolationKind::task_graph, path, "edge endpoint '" + a + "' is not a node", a);
      if (!nodes.count(b)) add(ViolationKind::task_graph, path, "edge endpoint '" + b + "' is not a node", b);
      adj[a].push_back(b);
    }
    for (std::size_t i = 0; i < tg.parallel_groups.size(); ++i)
      for (const auto& m : tg.parallel_groups[i])
        if (!nodes.count(m))
          add(ViolationKind::task_graph, "$.task_graph.parallel_groups[" + std::to_string(i) + "]",
              "group member '" + m + "' is not a node", m);
    // Cycle detection by DFS colouring.
    std::map<std::string, int> colour;
    std::function<bool(const std::string&)> visit = [&](const std::string& n) {
      colour[n] = 1;
      for (const auto& m : adj[n]) {
        if (colour[m] == 1) return true;
        if (colour[m] == 0 && visit(m)) return true;
      }
      colour[n] = 2;
      return false;
    };
    for (const auto& n : tg.nodes)
      if (colour[n] == 0 && visit(n)) {
        add(ViolationKind::task_graph, "$.task_graph.edges", "ordering edges contain a cycle");
        break;
      }
  }
};

}  // namespace

std::vector<Violation> validate_schema(const GameSpec& spec) { return Validator(spec).run(); }

int max_score(const GameSpec& spec) {
  return std::accumulate(spec.rewards.begin(), spec.rewards.end(), 0,
                         [](int acc, const Reward& r) { return acc + r.value; });
}

// ---------------------------------------------------------------------------
// Inform 7 export

namespace {

std::string quote(const std::string& s) {
  std::string out;
  for (char c : s) out += (c == '"') ? '\'' : c;
  return "\"" + out + "\"";
}

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

bool inform_native_flag(const std::string& f) {
  return f == "openable" || f == "open" || f == "closed" || f == "switchable" || f == "on" || f == "off" ||
         f == "edible" || f == "portable";
}

std::string inform_flag(const std::string& f) {
  if (f == "on") return "switched on";
  if (f == "off") return "switched off";
  return f;
}

std::string inform_action_name(const std::string& name) {
  std::string out = name;
  std::replace(out.begin(), out.end(), '_', '-');
  return out;
}

class InformWriter {
 public:
  explicit InformWriter(const GameSpec& spec) : spec_(spec) {}

  std::string run() {
    check_flags();
    out_ << quote(spec_.title) << " by \"skillgym\"\n\n";
    out_ << "Use scoring.\n";
    out_ << "The maximum score is " << max_score(spec_) << ".\n\n";
    for (const auto& f : custom_flags_) out_ << "A thing can be " << f << ".\n";
    for (std::size_t i = 0; i < spec_.rewards.size(); ++i) out_ << "Reward-" << i + 1 << " is a truth state that varies.\n";
    if (!custom_flags_.empty() || !spec_.rewards.empty()) out_ << "\n";

    for (const auto& r : spec_.rooms) out_ << capitalize(r.name) << " is a room. " << quote(r.description) << "\n";
    out_ << "\n";
    for (const auto& e : spec_.entities) out_ << entity_line(e) << "\n";
    out_ << "\nWhen play begins: say " << quote(spec_.goal_text) << ".\n\n";

    for (const auto& a : spec_.custom_actions) action_block(a);
    for (std::size_t i = 0; i < spec_.rewards.size(); ++i) reward_block(i);
    out_ << "Every turn when the score is the maximum score: end the story finally.\n";
    return out_.str();
  }

 private:
  const GameSpec& spec_;
  std::set<std::string> custom_flags_;
  std::ostringstream out_;

  void check_flags() {
    for (const auto& f : declared_flags(spec_)) {
      if (inform_native_flag(f)) continue;
      bool letters = !f.empty() && std::all_of(f.begin(), f.end(), [](char c) {
        return std::islower(static_cast<unsigned char>(c));
      });
      if (!letters) throw UnsupportedConstruct(f);
      custom_flags_.insert(f);
    }
  }

  std::string where(const std::string& loc) const {
    auto ref = parse_location(loc);
    switch (ref.kind) {
      case LocationRef::Kind::room: return "in " + capitalize(ref.target);
      case LocationRef::Kind::in: return "in the " + ref.target;
      case LocationRef::Kind::on: return "on the " + ref.target;
    }
    return "";
  }

  std::string entity_line(const Entity& e) const {
    std::string kind;
    switch (e.kind) {
      case EntityKind::portable:
      case EntityKind::fixture: kind = "thing"; break;
      case EntityKind::container: kind = "container"; break;
      case EntityKind::supporter: kind = "supporter"; break;
      case EntityKind::device: kind = "device"; break;
    }
    std::vector<std::string> adjectives;
    for (const auto& [flag, value] : e.properties) {
      if (!value || flag == "portable") continue;
      adjectives.push_back(inform_flag(flag));
    }
    std::string line = "The " + e.name + " is a " + kind + " " + where(e.location) + ".";
    if (!e.carryable()) line += " It is fixed in place.";
    if (!adjectives.empty()) line += " It is " + text::join(adjectives, " and ") + ".";
    if (!e.description.empty()) line += " The description is " + quote(e.description) + ".";
    return line;
  }

  std::string subject_phrase(const std::string& subject, const std::vector<TemplatePart>& slots) const {
    for (std::size_t i = 0; i < slots.size(); ++i)
      if (subject == "<" + slots[i].text + ">") return i == 0 ? "the noun" : "the second noun";
    return "the " + subject;
  }

  std::string location_phrase(const std::string& loc, const std::vector<TemplatePart>& slots) const {
    if (loc == "inventory") return "carried by the player";
    auto ref = parse_location(loc);
    if (ref.kind == LocationRef::Kind::room) return "in " + capitalize(ref.target);
    return std::string(ref.kind == LocationRef::Kind::in ? "in " : "on ") + subject_phrase(ref.target, slots);
  }

  std::string condition(const Predicate& p, const std::vector<TemplatePart>& slots, bool failing) const {
    bool want = failing ? p.negated : !p.negated;
    std::string is = want ? " is " : " is not ";
    switch (p.relation) {
      case Relation::has_flag: return subject_phrase(p.subject, slots) + is + inform_flag(p.argument);
      case Relation::in_location:
        return subject_phrase(p.subject, slots) + is + location_phrase(p.argument, slots);
      case Relation::in_inventory: return subject_phrase(p.subject, slots) + is + "carried by the player";
      case Relation::action_completed: {
        for (std::size_t i = 0; i < spec_.rewards.size(); ++i)
          if (spec_.rewards[i].trigger.relation == Relation::action_completed &&
              spec_.rewards[i].trigger.argument == p.argument)
            return "reward-" + std::to_string(i + 1) + (want ? " is true" : " is false");
        return "[" + p.argument + "] has happened";
      }
    }
    return "";
  }

  void action_block(const CustomAction& a) {
    auto slots = template_slots(a.template_text);
    auto name = inform_action_name(a.name);
    const char* arity = slots.empty() ? "applying to nothing" : slots.size() == 1 ? "applying to one thing"
                                                                                : "applying to two things";
    out_ << capitalize(name) << " is an action " << arity << ".\n";
    std::vector<std::string> forms{a.template_text};
    forms.insert(forms.end(), a.aliases.begin(), a.aliases.end());
    for (const auto& form : forms) {
      std::vector<std::string> words;
      for (const auto& part : parse_template(form)) words.push_back(part.is_slot ? "[something]" : part.text);
      out_ << "Understand " << quote(text::join(words, " ")) << " as " << name << ".\n";
    }
    out_ << "Check " << name << ":\n";
    if (a.preconditions.empty()) out_ << "\tcontinue the action.\n";
    for (const auto& p : a.preconditions)
      out_ << "\tif " << condition(p, slots, true) << ", say " << quote(a.failure_text) << " instead;\n";
    out_ << "Carry out " << name << ":\n";
    if (a.effects.empty()) out_ << "\tdo nothing.\n";
    for (const auto& e : a.effects) {
      auto subj = subject_phrase(e.subject, slots);
      switch (e.op) {
        case EffectOp::set_flag: out_ << "\tnow " << subj << " is " << inform_flag(e.argument) << ";\n"; break;
        case EffectOp::clear_flag: out_ << "\tnow " << subj << " is not " << inform_flag(e.argument) << ";\n"; break;
        case EffectOp::move:
          if (e.argument == "inventory")
            out_ << "\tnow the player carries " << subj << ";\n";
          else
            out_ << "\tnow " << subj << " is " << location_phrase(e.argument, slots) << ";\n";
          break;
        case EffectOp::consume: out_ << "\tremove " << subj << " from play;\n"; break;
      }
    }
    if (a.fatal) out_ << "\tend the story saying \"You have failed\";\n";
    out_ << "Report " << name << ":\n\tsay " << quote(a.success_text) << ".\n\n";
  }

  std::string inform_command_rule(const std::string& action) const {
    try {
      auto cmd = parse_command_text(action, spec_);
      const std::string n = cmd.noun ? "the " + *cmd.noun : "";
      const std::string s = cmd.second_noun ? "the " + *cmd.second_noun : "";
      if (cmd.verb == "look") return "looking";
      if (cmd.verb == "inventory") return "taking inventory";
      if (cmd.verb == "examine") return "examining " + n;
      if (cmd.verb == "take") return "taking " + n;
      if (cmd.verb == "drop") return "dropping " + n;
      if (cmd.verb == "open") return "opening " + n;
      if (cmd.verb == "close") return "closing " + n;
      if (cmd.verb == "put-in") return "inserting " + n + " into " + s;
      if (cmd.verb == "put-on") return "putting " + n + " on " + s;
      if (cmd.verb == "turn-on") return "switching on " + n;
      if (cmd.verb == "turn-off") return "switching off " + n;
      auto rule = inform_action_name(cmd.verb);
      if (!n.empty()) rule += " " + n;
      if (!s.empty()) rule += " with " + s;
      return rule;
    } catch (const ParseError&) {
      return action;
    }
  }

  void reward_block(std::size_t i) {
    const auto& r = spec_.rewards[i];
    auto flag = "reward-" + std::to_string(i + 1);
    if (r.trigger.relation == Relation::action_completed) {
      out_ << "After " << inform_command_rule(r.trigger.argument) << " when " << flag << " is false:\n";
    } else {
      out_ << "Every turn when " << condition(r.trigger, {}, false) << " and " << flag << " is false:\n";
    }
    out_ << "\tnow " << flag << " is true;\n";
    out_ << "\tincrease the score by " << r.value << ";\n";
    if (r.trigger.relation == Relation::action_completed) out_ << "\tcontinue the action.\n";
    out_ << "\n";
  }
};

}  // namespace

std::string emit_inform7(const GameSpec& spec) { return InformWriter(spec).run(); }

}  // namespace skillgym
