#include "reference_interpreter.hpp"

#include <algorithm>
#include <sstream>

namespace refint {

using skillgym::EntityKind;
using skillgym::GameSpec;
using skillgym::Predicate;
using skillgym::Relation;

namespace {

std::string strip_slot(const std::string& s) {
  if (s.size() > 2 && s.front() == '<' && s.back() == '>') return s.substr(1, s.size() - 2);
  return "";
}

// Splits "fill <container> with water" into literal words and slot names.
std::vector<std::pair<bool, std::string>> pieces(const std::string& tpl) {
  std::vector<std::pair<bool, std::string>> out;
  std::istringstream in(tpl);
  std::string w;
  while (in >> w) {
    auto slot = strip_slot(w);
    out.emplace_back(!slot.empty(), slot.empty() ? w : slot);
  }
  return out;
}

bool carryable(const skillgym::Entity& e) {
  if (e.kind == EntityKind::portable) return true;
  auto it = e.properties.find("portable");
  return it != e.properties.end() && it->second;
}

bool fits(const std::string& slot, const skillgym::Entity& e) {
  if (slot == "object") return true;
  if (slot == "portable") return carryable(e);
  return std::string(skillgym::to_string(e.kind)) == slot;
}

}  // namespace

Interpreter::Interpreter(GameSpec spec) : spec_(std::move(spec)) {
  for (const auto& r : spec_.rewards)
    if (r.trigger.relation == Relation::action_completed) referenced_.insert(r.trigger.argument);
  for (const auto& a : spec_.custom_actions)
    for (const auto& p : a.preconditions)
      if (p.relation == Relation::action_completed) referenced_.insert(p.argument);
}

std::string Interpreter::place(const std::string& loc, const std::map<std::string, std::string>& slots) const {
  auto resolve = [&](std::string n) {
    if (auto k = strip_slot(n); !k.empty()) return slots.at(k);
    return n;
  };
  if (loc == "inventory") return "held";
  if (loc.rfind("in ", 0) == 0) return "in:" + resolve(loc.substr(3));
  if (loc.rfind("on ", 0) == 0) return "on:" + resolve(loc.substr(3));
  return "room:" + loc;
}

State Interpreter::initial() const {
  State s;
  for (const auto& e : spec_.entities) {
    s.where[e.name] = place(e.location, {});
    auto& f = s.flags[e.name];
    for (const auto& [k, v] : e.properties)
      if (v) f.insert(k);
  }
  return s;
}

bool Interpreter::has(const State& s, const std::string& e, const std::string& f) const {
  return s.flags.at(e).count(f) > 0;
}

void Interpreter::set(State& s, const std::string& e, const std::string& f, bool v) const {
  auto& fs = s.flags[e];
  if (v) {
    fs.insert(f);
  } else {
    fs.erase(f);
  }
  auto other = [&](const std::string& a, const std::string& b, const char* gate) {
    if (f != a && f != b) return;
    const auto& o = f == a ? b : a;
    if (v)
      fs.erase(o);
    else if (gate && fs.count(gate))
      fs.insert(o);
  };
  other("open", "closed", "openable");
  other("on", "off", "switchable");
  other("filled", "empty", nullptr);
}

bool Interpreter::visible(const State& s, const std::string& e) const {
  std::string cur = e;
  for (std::size_t guard = 0; guard <= spec_.entities.size(); ++guard) {
    const auto& w = s.where.at(cur);
    if (w == "held") return true;
    if (w == "gone") return false;
    if (w.rfind("room:", 0) == 0) return w.substr(5) == spec_.rooms.front().name;
    auto holder = w.substr(3);
    if (w.rfind("in:", 0) == 0 && has(s, holder, "closed")) return false;
    cur = holder;
  }
  return false;
}

bool Interpreter::test(const State& s, const Predicate& p, const std::map<std::string, std::string>& slots) const {
  auto subject = [&]() -> std::string {
    if (auto k = strip_slot(p.subject); !k.empty()) return slots.count(k) ? slots.at(k) : "";
    return p.subject;
  };
  bool r = false;
  switch (p.relation) {
    case Relation::has_flag: {
      auto e = subject();
      r = !e.empty() && has(s, e, p.argument);
      break;
    }
    case Relation::in_location: {
      auto e = subject();
      r = !e.empty() && s.where.at(e) == place(p.argument, slots);
      break;
    }
    case Relation::in_inventory: {
      auto e = subject();
      r = !e.empty() && s.where.at(e) == "held";
      break;
    }
    case Relation::action_completed: r = s.completed.count(p.argument) > 0; break;
  }
  return p.negated ? !r : r;
}

std::map<std::string, Interpreter::Cmd> Interpreter::enumerate(const State& s) const {
  std::map<std::string, Cmd> out;
  if (s.done) return out;
  auto on = [&](const char* v) { return spec_.default_actions.count(v) > 0; };
  if (on("look")) out["look"] = {"look", "", "", {}};
  if (on("inventory")) out["inventory"] = {"inventory", "", "", {}};
  std::vector<std::string> vis;
  for (const auto& e : spec_.entities)
    if (visible(s, e.name)) vis.push_back(e.name);
  for (const auto& x : vis) {
    const bool held = s.where.at(x) == "held";
    if (on("examine")) out["examine " + x] = {"examine", x, "", {}};
    if (on("take") && !held) out["take " + x] = {"take", x, "", {}};
    if (on("drop") && held) out["drop " + x] = {"drop", x, "", {}};
    if (on("open")) out["open " + x] = {"open", x, "", {}};
    if (on("close")) out["close " + x] = {"close", x, "", {}};
    if (on("turn-on")) out["turn on " + x] = {"turn-on", x, "", {}};
    if (on("turn-off")) out["turn off " + x] = {"turn-off", x, "", {}};
    if (!held) continue;
    for (const auto& y : vis) {
      if (y == x) continue;
      auto kind = spec_.find_entity(y)->kind;
      if (kind == EntityKind::container && on("put-in")) out["put " + x + " in " + y] = {"put-in", x, y, {}};
      if (kind == EntityKind::supporter && on("put-on")) out["put " + x + " on " + y] = {"put-on", x, y, {}};
    }
  }
  for (const auto& act : spec_.custom_actions) {
    auto ps = pieces(act.template_text);
    std::vector<std::string> slots;
    for (const auto& [is_slot, t] : ps)
      if (is_slot) slots.push_back(t);
    std::map<std::string, std::string> bind;
    std::vector<std::string> used;
    auto rec = [&](auto&& self, std::size_t k) -> void {
      if (k == slots.size()) {
        std::string text;
        for (const auto& [is_slot, t] : ps) text += (text.empty() ? "" : " ") + (is_slot ? bind[t] : t);
        out.emplace(text, Cmd{act.name, "", "", bind});
        return;
      }
      for (const auto& e : vis) {
        if (!fits(slots[k], *spec_.find_entity(e))) continue;
        if (std::find(used.begin(), used.end(), e) != used.end()) continue;
        bind[slots[k]] = e;
        used.push_back(e);
        self(self, k + 1);
        used.pop_back();
      }
    };
    rec(rec, 0);
  }
  return out;
}

std::vector<std::string> Interpreter::admissible(const State& s) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : enumerate(s)) out.push_back(k);
  return out;
}

bool Interpreter::run(State& s, const Cmd& c) const {
  if (const auto* act = spec_.find_action(c.verb)) {
    for (const auto& p : act->preconditions)
      if (!test(s, p, c.slots)) return false;
    for (const auto& e : act->effects) {
      std::string subj = e.subject;
      if (auto k = strip_slot(subj); !k.empty()) subj = c.slots.at(k);
      switch (e.op) {
        case skillgym::EffectOp::set_flag: set(s, subj, e.argument, true); break;
        case skillgym::EffectOp::clear_flag: set(s, subj, e.argument, false); break;
        case skillgym::EffectOp::move: s.where[subj] = place(e.argument, c.slots); break;
        case skillgym::EffectOp::consume: s.where[subj] = "gone"; break;
      }
    }
    return true;
  }
  const auto& v = c.verb;
  if (v == "look" || v == "inventory" || v == "examine") return true;
  const auto& x = c.a;
  const bool held = s.where.at(x) == "held";
  if (v == "take") {
    if (held || !carryable(*spec_.find_entity(x))) return false;
    s.where[x] = "held";
    return true;
  }
  if (v == "drop") {
    if (!held) return false;
    s.where[x] = "room:" + spec_.rooms.front().name;
    return true;
  }
  if (v == "open" || v == "close") {
    const auto want = v == "open" ? "open" : "closed";
    if (!has(s, x, "openable") || has(s, x, want)) return false;
    set(s, x, want, true);
    return true;
  }
  if (v == "turn-on" || v == "turn-off") {
    const auto want = v == "turn-on" ? "on" : "off";
    if (!has(s, x, "switchable") || has(s, x, want)) return false;
    set(s, x, want, true);
    return true;
  }
  if (v == "put-in" || v == "put-on") {
    if (!held) return false;
    // Refuse to put a holder into something it (transitively) holds.
    std::string cur = c.b;
    for (std::size_t guard = 0; guard <= spec_.entities.size(); ++guard) {
      if (cur == x) return false;
      const auto& w = s.where.at(cur);
      if (w.rfind("in:", 0) != 0 && w.rfind("on:", 0) != 0) break;
      cur = w.substr(3);
    }
    if (v == "put-in" && has(s, c.b, "closed")) return false;
    s.where[x] = (v == "put-in" ? "in:" : "on:") + c.b;
    return true;
  }
  return false;
}

State Interpreter::step(const State& s0, const std::string& command) const {
  State s = s0;
  s.moves += 1;
  auto cmds = enumerate(s0);
  auto it = cmds.find(command);
  if (it != cmds.end() && run(s, it->second)) s.completed.insert(command);
  for (std::size_t i = 0; i < spec_.rewards.size(); ++i) {
    if (s.rewards.count(i)) continue;
    if (test(s, spec_.rewards[i].trigger, {})) {
      s.rewards.insert(i);
      s.score += spec_.rewards[i].value;
    }
  }
  s.done = s.rewards.size() == spec_.rewards.size();
  return s;
}

std::string Interpreter::canonical(const State& s) const {
  std::ostringstream os;
  for (const auto& e : spec_.entities) {
    os << e.name << "@" << s.where.at(e.name) << "[";
    for (const auto& f : s.flags.at(e.name)) os << f << ",";
    os << "]";
  }
  os << "|r";
  for (auto r : s.rewards) os << r << ",";
  os << "|a";
  for (const auto& a : s.completed)
    if (referenced_.count(a)) os << a << ",";
  os << "|" << s.score << "|" << s.moves << "|" << s.done;
  return os.str();
}

std::string canonical_engine(const skillgym::engine::Game& game, const skillgym::engine::WorldState& s) {
  using Kind = skillgym::engine::Location::Kind;
  const auto& spec = game.spec();
  std::ostringstream os;
  for (std::size_t i = 0; i < spec.entities.size(); ++i) {
    const auto& loc = s.entities[i].location;
    os << spec.entities[i].name << "@";
    switch (loc.kind) {
      case Kind::room: os << "room:" << spec.rooms[loc.ref].name; break;
      case Kind::in: os << "in:" << spec.entities[loc.ref].name; break;
      case Kind::on: os << "on:" << spec.entities[loc.ref].name; break;
      case Kind::inventory: os << "held"; break;
      case Kind::nowhere: os << "gone"; break;
    }
    std::set<std::string> flags;
    for (std::size_t b = 0; b < game.flag_names().size(); ++b)
      if ((s.entities[i].flags >> b) & 1U) flags.insert(game.flag_names()[b]);
    os << "[";
    for (const auto& f : flags) os << f << ",";
    os << "]";
  }
  os << "|r";
  for (std::size_t r = 0; r < spec.rewards.size(); ++r)
    if ((s.collected_rewards >> r) & 1U) os << r << ",";
  os << "|a";
  std::set<std::string> done;
  for (std::size_t a = 0; a < game.tracked_actions().size(); ++a)
    if ((s.completed_actions >> a) & 1U) done.insert(game.tracked_actions()[a]);
  for (const auto& a : done) os << a << ",";
  os << "|" << s.score << "|" << s.moves << "|" << s.done;
  return os.str();
}

}  // namespace refint
