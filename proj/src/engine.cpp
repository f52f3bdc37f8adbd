#include "skillgym/engine.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>

#include <json.hpp>

#include "skillgym/text.hpp"

namespace skillgym::engine {

namespace {

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string substitute_slots(std::string msg, const std::map<std::string, std::string>& slots) {
  for (const auto& [slot, name] : slots) {
    const std::string ref = "<" + slot + ">";
    for (auto pos = msg.find(ref); pos != std::string::npos; pos = msg.find(ref, pos + name.size()))
      msg.replace(pos, ref.size(), name);
  }
  return msg;
}

const char* kCantSee = "You can't see any such thing.";

}  // namespace

Game::Game(GameSpec spec) : spec_(std::make_shared<const GameSpec>(std::move(spec))) {
  const auto& g = *spec_;
  grammar_ = std::make_shared<const CommandGrammar>(g);
  auto flags = declared_flags(g);
  flag_names_.assign(flags.begin(), flags.end());
  if (flag_names_.size() > 64) throw std::invalid_argument("game uses more than 64 flags");
  if (g.rewards.size() > 64) throw std::invalid_argument("game has more than 64 rewards");
  if (g.entities.size() > 0xffff) throw std::invalid_argument("too many entities");

  std::set<std::string> tracked;
  for (const auto& r : g.rewards)
    if (r.trigger.relation == Relation::action_completed) tracked.insert(r.trigger.argument);
  for (const auto& a : g.custom_actions)
    for (const auto& p : a.preconditions)
      if (p.relation == Relation::action_completed) tracked.insert(p.argument);
  tracked_.assign(tracked.begin(), tracked.end());
  if (tracked_.size() > 64) throw std::invalid_argument("too many action_completed references");

  for (const auto& e : g.entities) {
    auto loc = resolve_location(e.location, {});
    if (!loc) throw std::invalid_argument("cannot place entity '" + e.name + "'");
    initial_locations_.push_back(*loc);
  }
  for (const auto& act : g.custom_actions) {
    CustomShape shape;
    std::string last_literal;
    for (const auto& p : parse_template(act.template_text)) {
      if (!p.is_slot) {
        auto words = normalized_words(p.text);
        if (!words.empty()) last_literal = words.back();
        continue;
      }
      if (shape.slots.size() == 1) shape.preposition = last_literal;
      shape.slots.push_back(p);
    }
    shapes_.push_back(std::move(shape));
  }
  max_score_ = skillgym::max_score(g);
}

int Game::flag_bit(std::string_view flag) const {
  auto it = std::lower_bound(flag_names_.begin(), flag_names_.end(), flag);
  if (it == flag_names_.end() || *it != flag) return -1;
  return static_cast<int>(it - flag_names_.begin());
}

std::size_t Game::entity_of(const std::string& name) const {
  auto idx = spec_->entity_index(name);
  if (!idx) throw std::invalid_argument("unknown entity '" + name + "'");
  return *idx;
}

std::optional<std::size_t> Game::bound(const std::string& ref, const Bindings& b) const {
  if (ref.size() > 2 && ref.front() == '<' && ref.back() == '>') {
    auto slot = ref.substr(1, ref.size() - 2);
    for (const auto& [name, idx] : b)
      if (name == slot) return idx;
    return std::nullopt;
  }
  return spec_->entity_index(ref);
}

std::optional<Location> Game::resolve_location(const std::string& loc, const Bindings& b) const {
  if (loc == "inventory") return Location{Location::Kind::inventory, 0};
  auto ref = parse_location(loc);
  if (ref.kind == LocationRef::Kind::room) {
    for (std::size_t i = 0; i < spec_->rooms.size(); ++i)
      if (spec_->rooms[i].name == ref.target) return Location{Location::Kind::room, static_cast<std::uint16_t>(i)};
    return std::nullopt;
  }
  auto holder = bound(ref.target, b);
  if (!holder) return std::nullopt;
  auto kind = ref.kind == LocationRef::Kind::in ? Location::Kind::in : Location::Kind::on;
  return Location{kind, static_cast<std::uint16_t>(*holder)};
}

WorldState Game::initial_state(std::uint64_t /*seed*/) const {
  WorldState s;
  s.entities.resize(spec_->entities.size());
  for (std::size_t i = 0; i < spec_->entities.size(); ++i) {
    s.entities[i].location = initial_locations_[i];
    for (const auto& [flag, value] : spec_->entities[i].properties) {
      int bit = flag_bit(flag);
      if (value && bit >= 0) s.entities[i].flags |= (std::uint64_t{1} << bit);
    }
  }
  return s;
}

bool Game::has_flag(const WorldState& s, std::size_t e, std::string_view flag) const {
  int bit = flag_bit(flag);
  return bit >= 0 && (s.entities[e].flags >> bit) & 1U;
}

void Game::set_flag(WorldState& s, std::size_t e, const std::string& flag, bool value) const {
  auto put = [&](const std::string& f, bool v) {
    int bit = flag_bit(f);
    if (bit < 0) return;
    if (v)
      s.entities[e].flags |= (std::uint64_t{1} << bit);
    else
      s.entities[e].flags &= ~(std::uint64_t{1} << bit);
  };
  put(flag, value);
  // Keep paired state flags consistent.
  static const std::vector<std::pair<std::string, std::string>> pairs = {
      {"open", "closed"}, {"on", "off"}, {"filled", "empty"}};
  for (const auto& [a, b] : pairs) {
    const std::string* other = flag == a ? &b : flag == b ? &a : nullptr;
    if (!other) continue;
    if (value) {
      put(*other, false);
    } else if ((a == "open" && has_flag(s, e, "openable")) || (a == "on" && has_flag(s, e, "switchable"))) {
      put(*other, true);
    }
  }
}

bool Game::held(const WorldState& s, std::size_t e) const {
  return s.entities[e].location.kind == Location::Kind::inventory;
}

bool Game::visible(const WorldState& s, std::size_t e) const {
  std::size_t cur = e;
  for (std::size_t guard = 0; guard <= s.entities.size(); ++guard) {
    const auto& loc = s.entities[cur].location;
    switch (loc.kind) {
      case Location::Kind::room: return loc.ref == 0;
      case Location::Kind::inventory: return true;
      case Location::Kind::nowhere: return false;
      case Location::Kind::in:
        if (has_flag(s, loc.ref, "closed")) return false;
        cur = loc.ref;
        break;
      case Location::Kind::on: cur = loc.ref; break;
    }
  }
  return false;
}

bool Game::inside(const WorldState& s, std::size_t e, std::size_t holder) const {
  std::size_t cur = e;
  for (std::size_t guard = 0; guard <= s.entities.size(); ++guard) {
    const auto& loc = s.entities[cur].location;
    if (loc.kind != Location::Kind::in && loc.kind != Location::Kind::on) return false;
    if (loc.ref == holder) return true;
    cur = loc.ref;
  }
  return false;
}

bool Game::eval(const WorldState& s, const Predicate& p, const Bindings& b) const {
  bool result = false;
  switch (p.relation) {
    case Relation::has_flag: {
      auto e = bound(p.subject, b);
      result = e && has_flag(s, *e, p.argument);
      break;
    }
    case Relation::in_location: {
      auto e = bound(p.subject, b);
      auto loc = resolve_location(p.argument, b);
      result = e && loc && s.entities[*e].location == *loc;
      break;
    }
    case Relation::in_inventory: {
      auto e = bound(p.subject, b);
      result = e && held(s, *e);
      break;
    }
    case Relation::action_completed: {
      auto it = std::lower_bound(tracked_.begin(), tracked_.end(), p.argument);
      if (it != tracked_.end() && *it == p.argument)
        result = (s.completed_actions >> (it - tracked_.begin())) & 1U;
      break;
    }
  }
  return p.negated ? !result : result;
}

std::string Game::state_tags(const WorldState& s, std::size_t e) const {
  std::vector<std::string> tags;
  for (std::size_t bit = 0; bit < flag_names_.size(); ++bit) {
    if (!((s.entities[e].flags >> bit) & 1U)) continue;
    const auto& f = flag_names_[bit];
    if (f == "openable" || f == "switchable" || f == "portable" || f == "edible") continue;
    if (f == "on")
      tags.push_back("switched on");
    else if (f == "off")
      tags.push_back("switched off");
    else
      tags.push_back(f);
  }
  return tags.empty() ? "" : " (" + text::join(tags, ", ") + ")";
}

std::string Game::room_description(const WorldState& s) const {
  const auto& room = spec_->rooms.front();
  std::string out = capitalize(room.name) + "\n" + room.description;
  std::vector<std::string> top;
  for (std::size_t i = 0; i < s.entities.size(); ++i)
    if (s.entities[i].location.kind == Location::Kind::room && s.entities[i].location.ref == 0)
      top.push_back(spec_->entities[i].name + state_tags(s, i));
  if (!top.empty()) out += "\nYou can see: " + text::join(top, ", ") + ".";
  for (std::size_t h = 0; h < s.entities.size(); ++h) {
    if (held(s, h) || !visible(s, h)) continue;
    std::vector<std::string> contents;
    Location::Kind kind = Location::Kind::nowhere;
    for (std::size_t i = 0; i < s.entities.size(); ++i) {
      const auto& loc = s.entities[i].location;
      if ((loc.kind == Location::Kind::in || loc.kind == Location::Kind::on) && loc.ref == h && visible(s, i)) {
        contents.push_back(spec_->entities[i].name + state_tags(s, i));
        kind = loc.kind;
      }
    }
    if (contents.empty()) continue;
    out += std::string("\n") + (kind == Location::Kind::in ? "In" : "On") + " the " + spec_->entities[h].name + ": " +
           text::join(contents, ", ") + ".";
  }
  return out;
}

std::string Game::inventory_text(const WorldState& s) const {
  std::vector<std::string> items;
  std::string nested;
  for (std::size_t i = 0; i < s.entities.size(); ++i) {
    if (!held(s, i)) continue;
    items.push_back(spec_->entities[i].name + state_tags(s, i));
    std::vector<std::string> contents;
    for (std::size_t j = 0; j < s.entities.size(); ++j) {
      const auto& loc = s.entities[j].location;
      if ((loc.kind == Location::Kind::in || loc.kind == Location::Kind::on) && loc.ref == i && visible(s, j))
        contents.push_back(spec_->entities[j].name + state_tags(s, j));
    }
    if (!contents.empty())
      nested += " In the " + spec_->entities[i].name + ": " + text::join(contents, ", ") + ".";
  }
  if (items.empty()) return "You are carrying nothing.";
  return "You are carrying: " + text::join(items, ", ") + "." + nested;
}

StepResult Game::intro(const WorldState& s) const {
  StepResult r;
  r.room_description = room_description(s);
  r.inventory_text = inventory_text(s);
  r.feedback = spec_->goal_text + "\n\n" + r.room_description;
  r.admissible = admissible_commands(s);
  r.done = s.done;
  r.won = s.won();
  return r;
}

Command Game::parse(std::string_view text, const WorldState& s) const {
  NounPreference prefer = [&](std::size_t i) { return held(s, i) ? 2 : visible(s, i) ? 1 : 0; };
  return grammar_->parse(text, prefer);
}

Game::Outcome Game::run_custom(WorldState& s, const CustomAction& act, const Command& cmd) const {
  Bindings b;
  for (const auto& [slot, name] : cmd.slots) {
    auto idx = spec_->entity_index(name);
    if (!idx || !visible(s, *idx)) return {kCantSee, false};
    b.emplace_back(slot, *idx);
  }
  for (const auto& p : act.preconditions)
    if (!eval(s, p, b)) {
      auto msg = act.failure_text.empty() ? std::string("Nothing happens.") : act.failure_text;
      return {substitute_slots(msg, cmd.slots), false};
    }
  for (const auto& e : act.effects) {
    auto subject = bound(e.subject, b);
    if (!subject) continue;
    switch (e.op) {
      case EffectOp::set_flag: set_flag(s, *subject, e.argument, true); break;
      case EffectOp::clear_flag: set_flag(s, *subject, e.argument, false); break;
      case EffectOp::move:
        if (auto loc = resolve_location(e.argument, b)) s.entities[*subject].location = *loc;
        break;
      case EffectOp::consume: s.entities[*subject].location = {Location::Kind::nowhere, 0}; break;
    }
  }
  auto msg = act.success_text.empty() ? std::string("Done.") : act.success_text;
  return {substitute_slots(msg, cmd.slots), true};
}

Game::Outcome Game::run(WorldState& s, const Command& cmd, bool verbose) const {
  const auto& v = cmd.verb;
  if (const auto* act = spec_->find_action(v)) return run_custom(s, *act, cmd);
  if (!is_default_verb(v) || !spec_->verb_enabled(v)) return {"That's not a verb I recognise.", false};
  if (v == "look") return {verbose ? room_description(s) : "", true};
  if (v == "inventory") return {verbose ? inventory_text(s) : "", true};

  if (!cmd.noun) return {"What do you want to " + v + "?", false};
  auto noun = spec_->entity_index(*cmd.noun);
  if (!noun || !visible(s, *noun)) return {kCantSee, false};
  const std::size_t x = *noun;
  const Entity& ex = spec_->entities[x];
  const std::string the = "the " + ex.name;

  if (v == "examine") {
    if (!verbose) return {"", true};
    std::string out = ex.description.empty() ? "You see nothing special about " + the + "." : ex.description;
    auto tags = state_tags(s, x);
    if (!tags.empty()) out += " It is " + tags.substr(2, tags.size() - 3) + ".";
    return {out, true};
  }
  if (v == "take") {
    if (held(s, x)) return {"You already have " + the + ".", false};
    if (!ex.carryable()) return {capitalize(the) + " is fixed in place.", false};
    s.entities[x].location = {Location::Kind::inventory, 0};
    return {"You take " + the + ".", true};
  }
  if (v == "drop") {
    if (!held(s, x)) return {"You aren't carrying " + the + ".", false};
    s.entities[x].location = {Location::Kind::room, 0};
    return {"You drop " + the + ".", true};
  }
  if (v == "open" || v == "close") {
    const bool opening = v == "open";
    if (!has_flag(s, x, "openable")) return {capitalize(the) + " can't be " + (opening ? "opened." : "closed."), false};
    if (has_flag(s, x, opening ? "open" : "closed"))
      return {capitalize(the) + " is already " + (opening ? "open." : "closed."), false};
    set_flag(s, x, opening ? "open" : "closed", true);
    std::string out = "You " + v + " " + the + ".";
    if (opening) {
      std::vector<std::string> contents;
      for (std::size_t i = 0; i < s.entities.size(); ++i)
        if (s.entities[i].location == Location{Location::Kind::in, static_cast<std::uint16_t>(x)})
          contents.push_back(spec_->entities[i].name);
      if (!contents.empty()) out += " Inside you see: " + text::join(contents, ", ") + ".";
    }
    return {out, true};
  }
  if (v == "turn-on" || v == "turn-off") {
    const bool on = v == "turn-on";
    if (!has_flag(s, x, "switchable")) return {capitalize(the) + " can't be switched " + (on ? "on." : "off."), false};
    if (has_flag(s, x, on ? "on" : "off")) return {capitalize(the) + " is already " + (on ? "on." : "off."), false};
    set_flag(s, x, on ? "on" : "off", true);
    return {"You turn " + std::string(on ? "on " : "off ") + the + ".", true};
  }
  if (v == "put-in" || v == "put-on") {
    if (!cmd.second_noun) return {"Where do you want to put " + the + "?", false};
    auto second = spec_->entity_index(*cmd.second_noun);
    if (!second || !visible(s, *second)) return {kCantSee, false};
    const std::size_t y = *second;
    const std::string the_y = "the " + spec_->entities[y].name;
    const bool in = v == "put-in";
    if (!held(s, x)) return {"You need to be holding " + the + " first.", false};
    if (x == y || inside(s, y, x)) return {"You can't put " + the + " inside itself.", false};
    if (in && spec_->entities[y].kind != EntityKind::container)
      return {"You can't put things in " + the_y + ".", false};
    if (!in && spec_->entities[y].kind != EntityKind::supporter)
      return {"You can't put things on " + the_y + ".", false};
    if (in && has_flag(s, y, "closed")) return {capitalize(the_y) + " is closed.", false};
    s.entities[x].location = {in ? Location::Kind::in : Location::Kind::on, static_cast<std::uint16_t>(y)};
    return {"You put " + the + (in ? " in " : " on ") + the_y + ".", true};
  }
  return {"That's not a verb I recognise.", false};
}

int Game::apply(WorldState& s, const Command& cmd, Outcome& out, bool verbose) const {
  if (s.done) throw EpisodeFinished();
  s.moves += 1;
  out = run(s, cmd, verbose);
  int delta = 0;
  if (out.success) {
    if (!tracked_.empty()) {
      auto canon = render_command(cmd, *spec_);
      auto it = std::lower_bound(tracked_.begin(), tracked_.end(), canon);
      if (it != tracked_.end() && *it == canon) s.completed_actions |= std::uint64_t{1} << (it - tracked_.begin());
    }
    if (const auto* act = spec_->find_action(cmd.verb); act && act->fatal) {
      s.done = true;
      s.failed = true;
      s.penalty += act->penalty;
      delta -= act->penalty;
      out.text += "\n\n*** You have failed ***";
      return delta;
    }
  }
  int gained = 0;
  for (std::size_t i = 0; i < spec_->rewards.size(); ++i) {
    if ((s.collected_rewards >> i) & 1U) continue;
    if (eval(s, spec_->rewards[i].trigger, {})) {
      s.collected_rewards |= std::uint64_t{1} << i;
      gained += spec_->rewards[i].value;
    }
  }
  if (gained > 0) {
    s.score += gained;
    delta += gained;
    out.text += " Your score has just gone up by " + std::to_string(gained) + (gained == 1 ? " point." : " points.");
  }
  const std::uint64_t all = spec_->rewards.size() == 64 ? ~std::uint64_t{0}
                                                         : (std::uint64_t{1} << spec_->rewards.size()) - 1;
  if (s.collected_rewards == all) {
    s.done = true;
    out.text += "\n\n*** You have won ***";
  }
  return delta;
}

WorldState Game::advance(const WorldState& state, const Command& cmd) const {
  WorldState next = state;
  Outcome out;
  apply(next, cmd, out, false);
  return next;
}

std::pair<WorldState, StepResult> Game::step(const WorldState& state, const Command& cmd, bool observe) const {
  WorldState next = state;
  Outcome out;
  StepResult r;
  r.score_delta = apply(next, cmd, out, true);
  r.feedback = std::move(out.text);
  r.done = next.done;
  r.won = next.won();
  if (!observe) return {std::move(next), std::move(r)};
  r.room_description = room_description(next);
  r.inventory_text = inventory_text(next);
  r.admissible = admissible_commands(next);
  return {std::move(next), std::move(r)};
}

std::vector<Command> Game::commands(const WorldState& s) const {
  std::vector<Command> out;
  if (s.done) return out;
  const auto& g = *spec_;
  auto simple = [&](const char* verb, const std::string* noun = nullptr, const char* prep = nullptr,
                    const std::string* second = nullptr) {
    Command c;
    c.verb = verb;
    if (noun) c.noun = *noun;
    if (prep) c.preposition = prep;
    if (second) c.second_noun = *second;
    out.push_back(std::move(c));
  };

  std::vector<std::size_t> vis;
  for (std::size_t i = 0; i < s.entities.size(); ++i)
    if (visible(s, i)) vis.push_back(i);

  if (g.verb_enabled("look")) simple("look");
  if (g.verb_enabled("inventory")) simple("inventory");
  // One-noun verbs are offered over everything in scope; the two-noun verbs
  // need a held object and a holder of the right kind.
  for (auto i : vis) {
    const auto& name = g.entities[i].name;
    const bool carrying = held(s, i);
    if (g.verb_enabled("examine")) simple("examine", &name);
    if (g.verb_enabled("take") && !carrying) simple("take", &name);
    if (g.verb_enabled("drop") && carrying) simple("drop", &name);
    if (g.verb_enabled("open")) simple("open", &name);
    if (g.verb_enabled("close")) simple("close", &name);
    if (g.verb_enabled("turn-on")) simple("turn-on", &name);
    if (g.verb_enabled("turn-off")) simple("turn-off", &name);
    if (!carrying) continue;
    for (auto j : vis) {
      if (j == i) continue;
      if (g.entities[j].kind == EntityKind::container && g.verb_enabled("put-in"))
        simple("put-in", &name, "in", &g.entities[j].name);
      if (g.entities[j].kind == EntityKind::supporter && g.verb_enabled("put-on"))
        simple("put-on", &name, "on", &g.entities[j].name);
    }
  }

  for (std::size_t a = 0; a < g.custom_actions.size(); ++a) {
    const auto& act = g.custom_actions[a];
    const auto& shape = shapes_[a];
    std::vector<std::size_t> pick(shape.slots.size());
    auto rec = [&](auto&& self, std::size_t k) -> void {
      if (k == shape.slots.size()) {
        Command c;
        c.verb = act.name;
        for (std::size_t q = 0; q < shape.slots.size(); ++q) c.slots[shape.slots[q].text] = g.entities[pick[q]].name;
        if (!shape.slots.empty()) c.noun = g.entities[pick[0]].name;
        if (shape.slots.size() > 1) {
          c.second_noun = g.entities[pick[1]].name;
          c.preposition = shape.preposition;
        }
        out.push_back(std::move(c));
        return;
      }
      for (auto i : vis) {
        if (!slot_accepts(shape.slots[k], g.entities[i])) continue;
        if (std::find(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(k), i) !=
            pick.begin() + static_cast<std::ptrdiff_t>(k))
          continue;
        pick[k] = i;
        self(self, k + 1);
      }
    };
    rec(rec, 0);
  }
  return out;
}

std::vector<Candidate> Game::candidates(const WorldState& s) const {
  std::vector<Candidate> out;
  for (auto& cmd : commands(s)) {
    auto text = render_command(cmd, *spec_);
    cmd.raw = text;
    out.push_back({std::move(text), std::move(cmd)});
  }
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) { return a.text < b.text; });
  out.erase(std::unique(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) { return a.text == b.text; }),
            out.end());
  return out;
}

std::vector<std::string> Game::admissible_commands(const WorldState& s) const {
  std::vector<std::string> out;
  for (auto& c : candidates(s)) out.push_back(std::move(c.text));
  return out;
}

std::string Game::state_key(const WorldState& s) const {
  const std::size_t flag_bytes = (flag_names_.size() + 7) / 8;
  std::string key;
  key.reserve(s.entities.size() * (3 + flag_bytes) + 18);
  for (const auto& e : s.entities) {
    key.push_back(static_cast<char>(e.location.kind));
    key.push_back(static_cast<char>(e.location.ref & 0xff));
    key.push_back(static_cast<char>(e.location.ref >> 8));
    for (std::size_t b = 0; b < flag_bytes; ++b) key.push_back(static_cast<char>((e.flags >> (8 * b)) & 0xff));
  }
  for (int b = 0; b < 8; ++b) key.push_back(static_cast<char>((s.collected_rewards >> (8 * b)) & 0xff));
  for (int b = 0; b < 8; ++b) key.push_back(static_cast<char>((s.completed_actions >> (8 * b)) & 0xff));
  key.push_back(static_cast<char>((s.done ? 1 : 0) | (s.failed ? 2 : 0)));
  return key;
}

std::uint64_t Game::state_hash(const WorldState& s) const { return text::fnv1a64(state_key(s)); }

// ---------------------------------------------------------------------------

std::string to_jsonl(const TranscriptRecord& rec) {
  nlohmann::ordered_json j;
  j["moves"] = rec.moves;
  j["command"] = rec.command;
  j["feedback"] = rec.feedback;
  j["score"] = rec.score;
  j["done"] = rec.done;
  return j.dump();
}

void write_transcript(std::ostream& out, const std::vector<TranscriptRecord>& records) {
  for (const auto& r : records) out << to_jsonl(r) << '\n';
}

std::vector<TranscriptRecord> read_transcript(std::istream& in) {
  std::vector<TranscriptRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    auto j = nlohmann::json::parse(line);
    TranscriptRecord r;
    r.moves = j.at("moves").get<int>();
    r.command = j.at("command").get<std::string>();
    r.feedback = j.value("feedback", "");
    r.score = j.value("score", 0);
    r.done = j.value("done", false);
    out.push_back(std::move(r));
  }
  return out;
}

WorldState replay(const Game& game, const std::vector<std::string>& commands, std::uint64_t seed) {
  WorldState s = game.initial_state(seed);
  for (const auto& c : commands) {
    if (s.done) throw EpisodeFinished();
    try {
      s = game.advance(s, game.parse(c, s));
    } catch (const ParseError&) {
      s.moves += 1;
    }
  }
  return s;
}

}  // namespace skillgym::engine
