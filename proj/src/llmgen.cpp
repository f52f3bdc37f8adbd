#include "skillgym/llmgen.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "skillgym/grammar.hpp"
#include "skillgym/text.hpp"

namespace skillgym::llmgen {

std::string GameIdea::slug() const { return text::slugify(idea_text); }

// ---------------------------------------------------------------------------
// Prompt

namespace {

const char* kHeader =
    "You design short text adventure games that teach everyday skills.\n"
    "Given a game idea, answer with exactly three sections and nothing else.\n"
    "Task sequence: numbered player commands that win the game, one step per line. "
    "Commands that may happen in any order share one line, separated by \" || \".\n"
    "Objects: one line per object written as \"- name | type | location | properties | description\". "
    "Type is one of portable, fixture, container, supporter, device. Location is the room name, "
    "\"in <container>\" or \"on <supporter>\". Properties are comma-separated flags such as "
    "openable, open, closed, switchable, on, off, edible, filled, empty.\n"
    "Actions: a \"Default:\" line naming the built-in verbs the game uses, then \"Custom:\" followed by one "
    "block per new skill: \"- <template>\" with typed slots, then indented \"requires:\", \"effects:\", "
    "\"success:\" and \"failure:\" lines. Conditions read \"<slot> is held\", \"<slot> is <flag>\", "
    "\"<slot> is not <flag>\" or \"<slot> is in <place>\"; effects read \"<slot> is <flag>\", "
    "\"<slot> is not <flag>\", \"<slot> goes in <place>\" or \"<slot> is consumed\".";

const std::vector<std::string>& sample_skills() {
  static const std::vector<std::string> skills = {
      "fill <container> with water", "boil water in <container>", "slice <portable>",
      "heat <container> on <supporter>", "wash <portable>", "pour <container> into <container2:container>"};
  return skills;
}

const std::vector<ExampleBlock>& builtin_examples() {
  static const std::vector<ExampleBlock> examples = {
      {"making tea",
       "Task sequence:\n"
       "1. open cupboard\n"
       "2. take kettle\n"
       "3. fill kettle with water\n"
       "4. boil water in kettle\n"
       "5. take mug\n"
       "6. pour kettle into mug\n"
       "\n"
       "Objects:\n"
       "- cupboard | container | kitchen | openable, closed | A narrow cupboard above the counter.\n"
       "- kettle | container | in cupboard | portable, empty | A small steel kettle.\n"
       "- mug | container | on counter | portable, empty | A white mug with a tea bag in it.\n"
       "- counter | supporter | kitchen | | A tiled counter.\n"
       "- sink | fixture | kitchen | | A deep sink with a tap.\n"
       "\n"
       "Actions:\n"
       "Default: look, examine, inventory, take, drop, open, close\n"
       "Custom:\n"
       "- fill <container> with water\n"
       "  requires: <container> is held; <container> is empty\n"
       "  effects: <container> is filled\n"
       "  success: You fill the <container> at the sink.\n"
       "  failure: You need to hold something empty to fill.\n"
       "- boil water in <container>\n"
       "  requires: <container> is held; <container> is filled\n"
       "  effects: <container> is boiled\n"
       "  success: The water in the <container> comes to a boil.\n"
       "  failure: There is no water to boil.\n"
       "- pour <container> into <cup:container>\n"
       "  requires: <container> is held; <container> is boiled; <cup> is held\n"
       "  effects: <container> is not boiled; <container> is empty; <cup> is brewed\n"
       "  success: You pour the hot water into the <cup>.\n"
       "  failure: You need boiling water and something to pour it into.\n"},
      {"washing dishes",
       "Task sequence:\n"
       "1. turn on tap\n"
       "2. take plate\n"
       "3. scrub plate\n"
       "4. put plate on rack\n"
       "\n"
       "Objects:\n"
       "- tap | device | kitchen | switchable, off | A chrome tap over the sink.\n"
       "- plate | portable | in sink | dirty | A plate crusted with old sauce.\n"
       "- sink | container | kitchen | | A sink full of dishes.\n"
       "- rack | supporter | kitchen | | A drying rack.\n"
       "\n"
       "Actions:\n"
       "Default: look, examine, inventory, take, drop, put on, turn on, turn off\n"
       "Custom:\n"
       "- scrub <portable>\n"
       "  requires: <portable> is held; tap is on; <portable> is dirty\n"
       "  effects: <portable> is not dirty; <portable> is clean\n"
       "  success: You scrub the <portable> under the running water.\n"
       "  failure: You need running water and something dirty in hand.\n"},
      {"making toast",
       "Task sequence:\n"
       "1. open bread box\n"
       "2. take bread\n"
       "3. put bread in toaster\n"
       "4. turn on toaster\n"
       "5. butter toast\n"
       "\n"
       "Objects:\n"
       "- bread box | container | kitchen | openable, closed | A wooden bread box.\n"
       "- bread | portable | in bread box | edible | A slice of white bread.\n"
       "- toaster | container | kitchen | switchable, off | A two-slot toaster.\n"
       "- butter | portable | on table | edible | A dish of soft butter.\n"
       "- table | supporter | kitchen | | A small kitchen table.\n"
       "\n"
       "Actions:\n"
       "Default: look, examine, inventory, take, drop, open, close, put in, turn on, turn off\n"
       "Custom:\n"
       "- butter toast\n"
       "  requires: bread is in toaster; toaster is on\n"
       "  effects: bread is buttered\n"
       "  success: You spread butter over the hot toast.\n"
       "  failure: There is no toast yet.\n"},
  };
  return examples;
}

}  // namespace

PromptTemplate default_template(std::size_t k, std::size_t action_examples) {
  PromptTemplate tpl;
  tpl.instruction_header = kHeader;
  const auto& skills = sample_skills();
  const std::size_t n = std::min(action_examples, skills.size());
  if (n > 0) {
    std::vector<std::string> shown(skills.begin(), skills.begin() + static_cast<std::ptrdiff_t>(n));
    tpl.instruction_header += "\nExample skills: " + text::join(shown, ", ") + ".";
  }
  const auto& ex = builtin_examples();
  if (k > ex.size()) throw std::invalid_argument("only " + std::to_string(ex.size()) + " built-in examples");
  tpl.example_blocks.assign(ex.begin(), ex.begin() + static_cast<std::ptrdiff_t>(k));
  return tpl;
}

std::string build_prompt(const GameIdea& idea, const PromptTemplate& tpl) {
  const std::string marker = PromptTemplate::kMarker;
  auto pos = tpl.target_text.find(marker);
  if (pos == std::string::npos || tpl.target_text.find(marker, pos + 1) != std::string::npos)
    throw std::invalid_argument("target text must contain the idea marker exactly once");
  std::string out = tpl.instruction_header + "\n\n";
  for (const auto& ex : tpl.example_blocks) out += "Game idea: " + ex.idea + "\n" + ex.sections_text + "\n";
  std::string target = tpl.target_text;
  target.replace(pos, marker.size(), idea.idea_text);
  out += target;
  if (!idea.required_skills.empty()) out += "Required skills: " + text::join(idea.required_skills, ", ") + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Response parsing

namespace {

enum class Section { none, tasks, objects, actions };

// Recognizes "Task sequence:", "**Objects:**", "### Actions:" and the like.
std::optional<std::pair<Section, std::string>> section_header(const std::string& line) {
  std::size_t i = 0;
  while (i < line.size() && (std::isspace(static_cast<unsigned char>(line[i])) || line[i] == '#' || line[i] == '*' ||
                             line[i] == '_' || line[i] == '>'))
    ++i;
  std::string rest = line.substr(i);
  std::string lower = text::to_lower(rest);
  static const std::vector<std::pair<std::string, Section>> names = {
      {"task sequence", Section::tasks}, {"objects", Section::objects}, {"actions", Section::actions}};
  for (const auto& [name, sec] : names) {
    if (lower.rfind(name, 0) != 0) continue;
    std::size_t j = name.size();
    while (j < rest.size() && (rest[j] == '*' || rest[j] == '_' || rest[j] == ' ')) ++j;
    if (j >= rest.size() || rest[j] != ':') continue;
    ++j;
    while (j < rest.size() && (rest[j] == '*' || rest[j] == '_')) ++j;
    return std::make_pair(sec, text::trim(rest.substr(j)));
  }
  return std::nullopt;
}

std::optional<std::string> list_item(const std::string& line) {
  static const std::regex item(R"(^\s*(?:[-*•]|\d+[.)])\s+(.*\S)\s*$)");
  std::smatch m;
  if (std::regex_match(line, m, item)) return m[1].str();
  return std::nullopt;
}

std::string strip_period(std::string s) {
  s = text::trim(s);
  while (!s.empty() && (s.back() == '.' || s.back() == ';')) s.pop_back();
  return text::trim(s);
}

std::vector<std::string> split_list(const std::string& s, char delim) {
  std::vector<std::string> out;
  for (auto& piece : text::split(s, delim)) {
    auto p = strip_period(piece);
    if (!p.empty()) out.push_back(std::move(p));
  }
  return out;
}

std::vector<std::string> split_parallel(const std::string& item) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = item.find("||", start);
    auto piece = text::to_lower(strip_period(item.substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (!piece.empty()) out.push_back(piece);
    if (pos == std::string::npos) break;
    start = pos + 2;
  }
  return out;
}

std::string normalize_verb(const std::string& v) {
  auto words = text::split_words(text::to_lower(v));
  return text::join(words, "-");
}

}  // namespace

ParsedSections parse_response(std::string_view raw) {
  std::map<Section, std::vector<std::string>> body;
  std::set<Section> seen;
  Section cur = Section::none;
  std::istringstream in{std::string(raw)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (auto h = section_header(line)) {
      cur = seen.insert(h->first).second ? h->first : Section::none;
      if (cur != Section::none && !h->second.empty()) body[cur].push_back("@inline " + h->second);
      continue;
    }
    if (cur != Section::none) body[cur].push_back(line);
  }
  if (!seen.count(Section::tasks)) throw MissingSection("task sequence");
  if (!seen.count(Section::objects)) throw MissingSection("objects");
  if (!seen.count(Section::actions)) throw MissingSection("actions");

  ParsedSections out;
  for (const auto& l : body[Section::tasks]) {
    if (l.rfind("@inline ", 0) == 0) {
      for (auto& step : split_list(l.substr(8), ',')) out.task_sequence.push_back(split_parallel(step));
      continue;
    }
    if (auto item = list_item(l)) {
      auto step = split_parallel(*item);
      if (!step.empty()) out.task_sequence.push_back(std::move(step));
    }
  }
  if (out.task_sequence.empty()) throw EmptySection("task sequence");

  for (const auto& l : body[Section::objects]) {
    auto item = list_item(l);
    if (!item || item->find('|') == std::string::npos) continue;
    auto fields = text::split(*item, '|');
    if (fields.size() < 3) continue;
    ObjectLine o;
    o.name = text::to_lower(fields[0]);
    o.type = text::to_lower(fields[1]);
    o.location = text::to_lower(fields[2]);
    if (fields.size() > 3)
      for (auto& p : split_list(text::to_lower(fields[3]), ','))
        if (p != "none" && p != "-") o.properties.push_back(p);
    if (fields.size() > 4) {
      std::vector<std::string> rest(fields.begin() + 4, fields.end());
      o.description = text::join(rest, " | ");
    }
    out.objects.push_back(std::move(o));
  }
  if (out.objects.empty()) throw EmptySection("objects");

  ActionBlock* block = nullptr;
  for (const auto& raw_line : body[Section::actions]) {
    std::string l = raw_line.rfind("@inline ", 0) == 0 ? raw_line.substr(8) : raw_line;
    std::string t = text::trim(l);
    std::string lower = text::to_lower(t);
    auto key_value = [&](const char* key) -> std::optional<std::string> {
      std::string k = key;
      if (lower.rfind(k + ":", 0) == 0) return text::trim(t.substr(k.size() + 1));
      return std::nullopt;
    };
    if (auto v = key_value("default")) {
      for (auto& verb : split_list(*v, ',')) out.default_actions.push_back(normalize_verb(verb));
      block = nullptr;
      continue;
    }
    if (key_value("custom")) {
      block = nullptr;
      continue;
    }
    if (block) {
      if (auto v = key_value("requires")) {
        block->requires_ = split_list(*v, ';');
        continue;
      }
      if (auto v = key_value("effects")) {
        block->effects = split_list(*v, ';');
        continue;
      }
      if (auto v = key_value("success")) {
        block->success = *v;
        continue;
      }
      if (auto v = key_value("failure")) {
        block->failure = *v;
        continue;
      }
      if (auto v = key_value("aliases")) {
        for (auto& a : split_list(*v, ';')) block->aliases.push_back(text::to_lower(a));
        continue;
      }
    }
    if (auto item = list_item(l)) {
      out.custom_actions.push_back({});
      block = &out.custom_actions.back();
      block->template_text = text::to_lower(strip_period(*item));
    }
  }
  if (out.default_actions.empty() && out.custom_actions.empty()) throw EmptySection("actions");
  return out;
}

std::string render_sections(const ParsedSections& s) {
  std::ostringstream out;
  out << "Task sequence:\n";
  for (std::size_t i = 0; i < s.task_sequence.size(); ++i)
    out << i + 1 << ". " << text::join(s.task_sequence[i], " || ") << "\n";
  out << "\nObjects:\n";
  for (const auto& o : s.objects) {
    out << "- " << o.name << " | " << o.type << " | " << o.location << " | " << text::join(o.properties, ", ");
    if (!o.description.empty()) out << " | " << o.description;
    out << "\n";
  }
  out << "\nActions:\n";
  if (!s.default_actions.empty()) out << "Default: " << text::join(s.default_actions, ", ") << "\n";
  if (!s.custom_actions.empty()) out << "Custom:\n";
  for (const auto& a : s.custom_actions) {
    out << "- " << a.template_text << "\n";
    if (!a.requires_.empty()) out << "  requires: " << text::join(a.requires_, "; ") << "\n";
    if (!a.effects.empty()) out << "  effects: " << text::join(a.effects, "; ") << "\n";
    if (!a.success.empty()) out << "  success: " << a.success << "\n";
    if (!a.failure.empty()) out << "  failure: " << a.failure << "\n";
    if (!a.aliases.empty()) out << "  aliases: " << text::join(a.aliases, "; ") << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Sections -> spec

namespace {

std::optional<EntityKind> object_kind(const std::string& type) {
  if (auto k = entity_kind_from(type)) return k;
  static const std::map<std::string, EntityKind> synonyms = {
      {"item", EntityKind::portable},       {"object", EntityKind::portable},  {"tool", EntityKind::portable},
      {"food", EntityKind::portable},       {"ingredient", EntityKind::portable},
      {"furniture", EntityKind::fixture},   {"scenery", EntityKind::fixture},  {"appliance", EntityKind::device},
      {"surface", EntityKind::supporter},   {"box", EntityKind::container},
  };
  auto it = synonyms.find(type);
  if (it == synonyms.end()) return std::nullopt;
  return it->second;
}

std::string lower_trim(const std::string& s) { return text::to_lower(text::trim(s)); }

// "<pot> is held", "pot is not open", "pasta is in <pot>", "after open cabinet".
Predicate read_condition(const std::string& raw, const std::string& action) {
  std::string s = lower_trim(raw);
  Predicate p;
  for (const char* prefix : {"after ", "done "}) {
    if (s.rfind(prefix, 0) == 0) {
      p.relation = Relation::action_completed;
      p.argument = text::trim(s.substr(std::string(prefix).size()));
      return p;
    }
  }
  auto is = s.find(" is ");
  if (is == std::string::npos) throw UnmappableAction(action, "cannot read condition '" + raw + "'");
  p.subject = text::trim(s.substr(0, is));
  std::string rest = text::trim(s.substr(is + 4));
  if (rest.rfind("not ", 0) == 0) {
    p.negated = true;
    rest = text::trim(rest.substr(4));
  }
  if (rest == "held" || rest == "carried" || rest == "in inventory") {
    p.relation = Relation::in_inventory;
  } else if (rest.rfind("in ", 0) == 0 || rest.rfind("on ", 0) == 0) {
    p.relation = Relation::in_location;
    p.argument = rest;
  } else {
    p.relation = Relation::has_flag;
    p.argument = rest;
  }
  return p;
}

// "<pot> is filled", "<pot> is not empty", "pasta goes in <pot>", "<egg> is consumed".
Effect read_effect(const std::string& raw, const std::string& action) {
  std::string s = lower_trim(raw);
  Effect e;
  auto goes = s.find(" goes ");
  if (goes != std::string::npos) {
    e.op = EffectOp::move;
    e.subject = text::trim(s.substr(0, goes));
    std::string where = text::trim(s.substr(goes + 6));
    if (where == "to inventory" || where == "to player") where = "inventory";
    else if (where.rfind("to ", 0) == 0) where = text::trim(where.substr(3));
    e.argument = where;
    return e;
  }
  auto is = s.find(" is ");
  if (is == std::string::npos) throw UnmappableAction(action, "cannot read effect '" + raw + "'");
  e.subject = text::trim(s.substr(0, is));
  std::string rest = text::trim(s.substr(is + 4));
  if (rest == "consumed" || rest == "gone" || rest == "used up") {
    e.op = EffectOp::consume;
  } else if (rest == "held" || rest == "carried") {
    e.op = EffectOp::move;
    e.argument = "inventory";
  } else if (rest.rfind("not ", 0) == 0) {
    e.op = EffectOp::clear_flag;
    e.argument = text::trim(rest.substr(4));
  } else {
    e.op = EffectOp::set_flag;
    e.argument = rest;
  }
  return e;
}

std::string action_name(const std::string& tpl, const std::set<std::string>& taken) {
  std::vector<std::string> literals;
  for (const auto& part : parse_template(tpl))
    if (!part.is_slot) literals.push_back(text::slugify(part.text));
  literals.erase(std::remove(literals.begin(), literals.end(), ""), literals.end());
  std::string base = literals.empty() ? "act" : literals.front();
  if (!is_default_verb(base) && !taken.count(base)) return base;
  std::string joined = text::join(literals, "_");
  if (!joined.empty() && !is_default_verb(joined) && !taken.count(joined)) return joined;
  for (int n = 2;; ++n) {
    auto candidate = base + "_" + std::to_string(n);
    if (!taken.count(candidate)) return candidate;
  }
}

}  // namespace

GameSpec sections_to_spec(const ParsedSections& sections, const GameIdea& idea) {
  if (text::trim(idea.idea_text).empty()) throw std::invalid_argument("game idea must be non-empty");
  GameSpec spec;
  spec.id = idea.slug();
  spec.title = idea.idea_text;
  if (!spec.title.empty()) spec.title[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(spec.title[0])));
  spec.goal_text = "Your goal: " + text::to_lower(idea.idea_text) + ".";

  std::set<std::string> names;
  for (const auto& o : sections.objects) {
    if (!names.insert(lower_trim(o.name)).second) throw DuplicateEntity(lower_trim(o.name));
  }
  std::vector<Violation> problems;
  for (std::size_t i = 0; i < sections.objects.size(); ++i) {
    const auto& o = sections.objects[i];
    Entity e;
    e.name = lower_trim(o.name);
    auto kind = object_kind(lower_trim(o.type));
    if (!kind) {
      problems.push_back({ViolationKind::schema, "objects[" + std::to_string(i) + "].type",
                          "unknown object type '" + o.type + "'", o.type});
      continue;
    }
    e.kind = *kind;
    e.location = lower_trim(o.location);
    for (const auto& p : o.properties) e.properties[lower_trim(p)] = true;
    e.description = text::trim(o.description);
    auto ref = parse_location(e.location);
    if (ref.kind == LocationRef::Kind::room && !names.count(ref.target)) {
      bool known = std::any_of(spec.rooms.begin(), spec.rooms.end(), [&](const Room& r) { return r.name == ref.target; });
      if (!known) spec.rooms.push_back({ref.target, "You are in the " + ref.target + "."});
    }
    spec.entities.push_back(std::move(e));
  }
  if (!problems.empty()) throw SpecError(std::move(problems));
  if (spec.rooms.empty()) spec.rooms.push_back({"room", "You are in a small room."});

  if (sections.default_actions.empty()) {
    spec.default_actions.insert(default_verbs().begin(), default_verbs().end());
  } else {
    for (const auto& v : sections.default_actions) spec.default_actions.insert(v);
    // Observation verbs are always available to players.
    for (const char* v : {"look", "examine", "inventory"}) spec.default_actions.insert(v);
  }

  std::set<std::string> taken;
  for (const auto& block : sections.custom_actions) {
    CustomAction a;
    a.template_text = lower_trim(block.template_text);
    try {
      a.name = action_name(a.template_text, taken);
    } catch (const std::invalid_argument& e) {
      throw UnmappableAction(block.template_text, e.what());
    }
    taken.insert(a.name);
    a.aliases = block.aliases;
    for (const auto& r : block.requires_) a.preconditions.push_back(read_condition(r, block.template_text));
    for (const auto& r : block.effects) a.effects.push_back(read_effect(r, block.template_text));
    a.success_text = text::trim(block.success);
    a.failure_text = text::trim(block.failure);
    spec.custom_actions.push_back(std::move(a));
  }

  // Task nodes must name commands the finished game understands.
  CommandGrammar grammar(spec);
  std::vector<std::vector<std::string>> steps;
  for (const auto& step : sections.task_sequence) {
    std::vector<std::string> canon;
    for (const auto& node : step) {
      try {
        canon.push_back(render_command(grammar.parse(node), spec));
      } catch (const ParseError& e) {
        throw UnmappableAction(node, e.what());
      }
    }
    steps.push_back(std::move(canon));
  }
  for (std::size_t i = 0; i < steps.size(); ++i) {
    for (const auto& node : steps[i]) spec.task_graph.nodes.push_back(node);
    if (steps[i].size() > 1) spec.task_graph.parallel_groups.push_back(steps[i]);
    if (i > 0)
      for (const auto& before : steps[i - 1])
        for (const auto& after : steps[i]) spec.task_graph.edges.emplace_back(before, after);
  }
  for (const auto& node : spec.task_graph.nodes) {
    Reward r;
    r.trigger.relation = Relation::action_completed;
    r.trigger.argument = node;
    r.value = 1;
    spec.rewards.push_back(std::move(r));
  }
  spec.max_steps_hint = 50;

  auto violations = validate_schema(spec);
  if (!violations.empty()) throw SpecError(std::move(violations));
  return spec;
}

// ---------------------------------------------------------------------------
// Clients and the retry loop

FixtureClient::FixtureClient(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::string FixtureClient::complete(const CompletionRequest& request) {
  namespace fs = std::filesystem;
  fs::path per_attempt = dir_ / (request.idea_slug + "." + std::to_string(request.attempt) + ".resp.txt");
  fs::path plain = dir_ / (request.idea_slug + ".resp.txt");
  const fs::path& chosen = fs::exists(per_attempt) ? per_attempt : plain;
  std::ifstream in(chosen, std::ios::binary);
  if (!in) throw ClientError("no canned response for '" + request.idea_slug + "' in " + dir_.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

GenerationFailed::GenerationFailed(int attempts, std::vector<std::string> errors)
    : std::runtime_error([&] {
        std::string msg = "generation failed after " + std::to_string(attempts) + " attempt(s)";
        if (!errors.empty()) msg += "; last error: " + errors.back();
        return msg;
      }()),
      attempts_(attempts),
      errors_(std::move(errors)) {}

GenerationResult generate_game(const GameIdea& idea, CompletionClient& client, const GenerationConfig& config) {
  if (config.max_retries < 1) throw std::invalid_argument("max_retries must be >= 1");
  const auto prompt = build_prompt(idea, default_template(config.k_shots, config.action_examples));
  GenerationResult result;
  for (int attempt = 1; attempt <= config.max_retries; ++attempt) {
    CompletionRequest req{prompt, idea.slug(), attempt, config.temperature, config.max_tokens};
    std::string raw = client.complete(req);
    result.attempts = attempt;
    try {
      result.spec = sections_to_spec(parse_response(raw), idea);
      result.raw_response = std::move(raw);
      return result;
    } catch (const ClientError&) {
      throw;
    } catch (const std::exception& e) {
      result.errors.push_back("attempt " + std::to_string(attempt) + ": " + e.what());
    }
  }
  throw GenerationFailed(result.attempts, result.errors);
}

std::filesystem::path write_generation(const GenerationResult& result, const GameIdea& idea,
                                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto spec_path = dir / (idea.slug() + ".game.json");
  {
    std::ofstream out(spec_path, std::ios::binary);
    out << serialize_spec(result.spec);
  }
  nlohmann::ordered_json meta;
  meta["idea"] = idea.idea_text;
  meta["id"] = result.spec.id;
  meta["attempts"] = result.attempts;
  meta["response_fnv1a64"] = text::hex64(text::fnv1a64(result.raw_response));
  meta["rejected"] = result.errors;
  std::ofstream out(dir / (idea.slug() + ".meta.json"), std::ios::binary);
  out << meta.dump(2) << "\n";
  return spec_path;
}

}  // namespace skillgym::llmgen
