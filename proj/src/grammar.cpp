#include "skillgym/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <memory>
#include <set>

#include "skillgym/text.hpp"

namespace skillgym {

namespace {

bool is_article(const std::string& w) { return w == "the" || w == "a" || w == "an"; }

bool is_kind_word(std::string_view w) {
  return w == "object" || w == "thing" || entity_kind_from(w).has_value();
}

struct Elem {
  bool np = false;
  std::vector<std::string> words;  // literal alternatives
  TemplatePart slot;               // for np elements
};

struct Pattern {
  std::string verb;
  std::vector<Elem> elems;
  std::string preposition;  // canonical preposition for two-noun defaults
  int custom = -1;          // index into spec.custom_actions
  int literal_count = 0;
};

Elem lit(std::initializer_list<const char*> alts) {
  Elem e;
  for (auto* a : alts) e.words.emplace_back(a);
  return e;
}

Elem np(const char* name = "object") {
  Elem e;
  e.np = true;
  e.slot = TemplatePart{true, name, "object"};
  return e;
}

std::vector<Pattern> default_patterns(const GameSpec& spec) {
  std::vector<Pattern> all = {
      {"look", {lit({"look", "l"})}, "", -1, 1},
      {"inventory", {lit({"inventory", "i", "inv"})}, "", -1, 1},
      {"examine", {lit({"examine", "x", "inspect"}), np()}, "", -1, 1},
      {"examine", {lit({"look"}), lit({"at"}), np()}, "", -1, 2},
      {"take", {lit({"take", "get"}), np()}, "", -1, 1},
      {"take", {lit({"pick"}), lit({"up"}), np()}, "", -1, 2},
      {"take", {lit({"pick"}), np(), lit({"up"})}, "", -1, 2},
      {"drop", {lit({"drop"}), np()}, "", -1, 1},
      {"drop", {lit({"put"}), lit({"down"}), np()}, "", -1, 2},
      {"open", {lit({"open"}), np()}, "", -1, 1},
      {"close", {lit({"close", "shut"}), np()}, "", -1, 1},
      {"put-in", {lit({"put", "place", "insert"}), np(), lit({"in", "into", "inside"}), np("second")}, "in", -1, 2},
      {"put-on", {lit({"put", "place"}), np(), lit({"on", "onto"}), np("second")}, "on", -1, 2},
      {"turn-on", {lit({"turn", "switch"}), lit({"on"}), np()}, "", -1, 2},
      {"turn-on", {lit({"turn", "switch"}), np(), lit({"on"})}, "", -1, 2},
      {"turn-off", {lit({"turn", "switch"}), lit({"off"}), np()}, "", -1, 2},
      {"turn-off", {lit({"turn", "switch"}), np(), lit({"off"})}, "", -1, 2},
  };
  std::vector<Pattern> out;
  for (auto& p : all)
    if (spec.verb_enabled(p.verb)) out.push_back(std::move(p));
  return out;
}

std::vector<Pattern> custom_patterns(const GameSpec& spec) {
  std::vector<Pattern> out;
  for (std::size_t i = 0; i < spec.custom_actions.size(); ++i) {
    const auto& act = spec.custom_actions[i];
    std::vector<std::string> forms{act.template_text};
    forms.insert(forms.end(), act.aliases.begin(), act.aliases.end());
    for (const auto& form : forms) {
      std::vector<TemplatePart> parts;
      try {
        parts = parse_template(form);
      } catch (const std::invalid_argument&) {
        continue;
      }
      Pattern p;
      p.verb = act.name;
      p.custom = static_cast<int>(i);
      for (auto& part : parts) {
        Elem e;
        if (part.is_slot) {
          e.np = true;
          e.slot = part;
        } else {
          for (auto& w : normalized_words(part.text)) {
            Elem l;
            l.words = {w};
            p.elems.push_back(l);
            ++p.literal_count;
          }
          continue;
        }
        p.elems.push_back(std::move(e));
      }
      out.push_back(std::move(p));
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Pattern& a, const Pattern& b) { return a.literal_count > b.literal_count; });
  return out;
}

using Span = std::pair<std::size_t, std::size_t>;  // [begin, end) into tokens

void enumerate_splits(const std::vector<Elem>& elems, std::size_t ei, const std::vector<std::string>& toks,
                      std::size_t ti, std::vector<Span>& cur, std::vector<std::vector<Span>>& out) {
  if (ei == elems.size()) {
    if (ti == toks.size()) out.push_back(cur);
    return;
  }
  const Elem& e = elems[ei];
  if (!e.np) {
    if (ti < toks.size() && std::find(e.words.begin(), e.words.end(), toks[ti]) != e.words.end())
      enumerate_splits(elems, ei + 1, toks, ti + 1, cur, out);
    return;
  }
  std::size_t remaining_min = 0;
  for (std::size_t k = ei + 1; k < elems.size(); ++k) remaining_min += 1;
  if (toks.size() < ti + 1 + remaining_min) return;
  for (std::size_t end = toks.size() - remaining_min; end > ti; --end) {
    cur.emplace_back(ti, end);
    enumerate_splits(elems, ei + 1, toks, end, cur, out);
    cur.pop_back();
  }
}

struct Resolution {
  std::optional<std::size_t> index;
  bool ambiguous = false;
  std::vector<std::string> candidates;
};

bool contains_run(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

Resolution resolve_noun(const std::vector<std::string>& phrase, const TemplatePart& slot, const GameSpec& spec,
                        const std::vector<std::vector<std::string>>& name_words, const NounPreference& prefer) {
  Resolution r;
  std::vector<std::size_t> exact;
  std::vector<std::size_t> partial;
  for (std::size_t i = 0; i < spec.entities.size(); ++i) {
    if (!slot_accepts(slot, spec.entities[i])) continue;
    if (name_words[i] == phrase)
      exact.push_back(i);
    else if (contains_run(name_words[i], phrase))
      partial.push_back(i);
  }
  if (exact.size() == 1) {
    r.index = exact.front();
    return r;
  }
  auto& pool = exact.empty() ? partial : exact;
  if (pool.empty()) return r;
  if (pool.size() == 1) {
    r.index = pool.front();
    return r;
  }
  if (prefer) {
    int best = 0;
    bool first = true;
    for (auto i : pool) {
      int p = prefer(i);
      if (first || p > best) best = p;
      first = false;
    }
    std::vector<std::size_t> top;
    for (auto i : pool)
      if (prefer(i) == best) top.push_back(i);
    if (top.size() == 1) {
      r.index = top.front();
      return r;
    }
    pool = top;
  }
  r.ambiguous = true;
  for (auto i : pool) r.candidates.push_back(spec.entities[i].name);
  return r;
}

std::string phrase_text(const std::vector<std::string>& toks, Span s) {
  return text::join(std::vector<std::string>(toks.begin() + static_cast<std::ptrdiff_t>(s.first),
                                             toks.begin() + static_cast<std::ptrdiff_t>(s.second)),
                    " ");
}

}  // namespace

std::vector<std::string> normalized_words(std::string_view s) {
  std::vector<std::string> out;
  for (auto& w : text::tokenize(s))
    if (!is_article(w)) out.push_back(std::move(w));
  return out;
}

std::vector<TemplatePart> parse_template(std::string_view tpl) {
  std::vector<TemplatePart> parts;
  std::size_t i = 0;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) {
      parts.push_back(TemplatePart{false, text::to_lower(word), ""});
      word.clear();
    }
  };
  while (i < tpl.size()) {
    char c = tpl[i];
    if (c == '<') {
      flush();
      auto close = tpl.find('>', i);
      if (close == std::string_view::npos) throw std::invalid_argument("unterminated slot in template");
      std::string inner = text::to_lower(text::trim(tpl.substr(i + 1, close - i - 1)));
      if (inner.empty()) throw std::invalid_argument("empty slot in template");
      TemplatePart slot{true, inner, "object"};
      if (auto colon = inner.find(':'); colon != std::string::npos) {
        slot.text = text::trim(inner.substr(0, colon));
        slot.kind = text::trim(inner.substr(colon + 1));
        if (slot.kind == "thing") slot.kind = "object";
        if (!is_kind_word(slot.kind)) throw std::invalid_argument("unknown slot kind: " + slot.kind);
      } else if (is_kind_word(inner)) {
        slot.kind = inner == "thing" ? "object" : inner;
      }
      if (slot.text.empty()) throw std::invalid_argument("empty slot name in template");
      parts.push_back(std::move(slot));
      i = close + 1;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
      ++i;
    } else {
      word.push_back(c);
      ++i;
    }
  }
  flush();
  if (parts.empty()) throw std::invalid_argument("empty template");
  std::set<std::string> seen;
  for (const auto& p : parts)
    if (p.is_slot && !seen.insert(p.text).second)
      throw std::invalid_argument("duplicate slot name: " + p.text);
  return parts;
}

std::vector<TemplatePart> template_slots(std::string_view tpl) {
  std::vector<TemplatePart> out;
  for (auto& p : parse_template(tpl))
    if (p.is_slot) out.push_back(std::move(p));
  return out;
}

bool slot_accepts(const TemplatePart& slot, const Entity& entity) {
  if (slot.kind == "object") return true;
  if (slot.kind == "portable") return entity.carryable();
  return to_string(entity.kind) == slot.kind;
}

ParseError::ParseError(ParseErrorKind kind, std::string phrase, std::vector<std::string> candidates)
    : std::runtime_error([&] {
        switch (kind) {
          case ParseErrorKind::unknown_verb: return "unknown verb: " + phrase;
          case ParseErrorKind::unresolved_noun: return "unresolved noun: " + phrase;
          case ParseErrorKind::ambiguous_noun: return "ambiguous noun: " + phrase;
        }
        return std::string("parse error");
      }()),
      kind_(kind),
      phrase_(std::move(phrase)),
      candidates_(std::move(candidates)) {}

struct CommandGrammar::Impl {
  std::vector<Pattern> patterns;
  std::set<std::string> verb_words;
  bool slot_first = false;
  std::vector<std::vector<std::string>> name_words;
};

CommandGrammar::CommandGrammar(const GameSpec& spec) : spec_(&spec) {
  auto built = std::make_shared<Impl>();
  auto& g = *built;
  g.patterns = custom_patterns(spec);
  for (auto& p : default_patterns(spec)) g.patterns.push_back(std::move(p));
  for (const auto& p : g.patterns)
    if (!p.elems.empty() && !p.elems.front().np)
      g.verb_words.insert(p.elems.front().words.begin(), p.elems.front().words.end());
  g.slot_first = std::any_of(g.patterns.begin(), g.patterns.end(),
                             [](const Pattern& p) { return !p.elems.empty() && p.elems.front().np; });
  g.name_words.reserve(spec.entities.size());
  for (const auto& e : spec.entities) g.name_words.push_back(normalized_words(e.name));
  impl_ = std::move(built);
}

Command parse_command_text(std::string_view raw, const GameSpec& spec, const NounPreference& prefer) {
  return CommandGrammar(spec).parse(raw, prefer);
}

Command CommandGrammar::parse(std::string_view raw, const NounPreference& prefer) const {
  const GameSpec& spec = *spec_;
  const auto& patterns = impl_->patterns;
  const auto& verb_words = impl_->verb_words;
  const auto& name_words = impl_->name_words;
  const bool slot_first = impl_->slot_first;
  const auto toks = normalized_words(raw);
  if (toks.empty()) throw ParseError(ParseErrorKind::unknown_verb, "");

  if (!verb_words.count(toks.front()) && !slot_first)
    throw ParseError(ParseErrorKind::unknown_verb, toks.front());

  std::optional<ParseError> ambiguity;
  std::optional<ParseError> unresolved;

  for (const auto& p : patterns) {
    std::vector<std::vector<Span>> splits;
    std::vector<Span> cur;
    enumerate_splits(p.elems, 0, toks, 0, cur, splits);
    for (const auto& split : splits) {
      std::vector<std::size_t> resolved;
      bool ok = true;
      std::size_t si = 0;
      for (const auto& e : p.elems) {
        if (!e.np) continue;
        auto phrase = std::vector<std::string>(toks.begin() + static_cast<std::ptrdiff_t>(split[si].first),
                                               toks.begin() + static_cast<std::ptrdiff_t>(split[si].second));
        auto res = resolve_noun(phrase, e.slot, spec, name_words, prefer);
        if (!res.index) {
          if (res.ambiguous && !ambiguity)
            ambiguity.emplace(ParseErrorKind::ambiguous_noun, phrase_text(toks, split[si]), res.candidates);
          else if (!res.ambiguous && !unresolved)
            unresolved.emplace(ParseErrorKind::unresolved_noun, phrase_text(toks, split[si]));
          ok = false;
          break;
        }
        resolved.push_back(*res.index);
        ++si;
      }
      if (!ok) continue;

      Command cmd;
      cmd.verb = p.verb;
      cmd.raw = std::string(raw);
      if (p.custom >= 0) {
        std::size_t k = 0;
        std::string prev_literal;
        for (const auto& e : p.elems) {
          if (!e.np) {
            prev_literal = e.words.front();
            continue;
          }
          const auto& name = spec.entities[resolved[k]].name;
          cmd.slots[e.slot.text] = name;
          if (k == 0) {
            cmd.noun = name;
          } else if (k == 1) {
            cmd.second_noun = name;
            cmd.preposition = prev_literal;
          }
          ++k;
        }
        // Slot names from the declared template, not an alias, keep renders stable.
        const auto& act = spec.custom_actions[static_cast<std::size_t>(p.custom)];
        auto decl = template_slots(act.template_text);
        std::map<std::string, std::string> canon;
        for (const auto& s : decl) {
          auto it = cmd.slots.find(s.text);
          if (it == cmd.slots.end()) {
            canon.clear();
            break;
          }
          canon[s.text] = it->second;
        }
        if (!canon.empty()) cmd.slots = std::move(canon);
      } else {
        if (!resolved.empty()) cmd.noun = spec.entities[resolved[0]].name;
        if (resolved.size() > 1) {
          cmd.second_noun = spec.entities[resolved[1]].name;
          cmd.preposition = p.preposition;
        }
      }
      return cmd;
    }
  }
  if (ambiguity) throw *ambiguity;
  if (unresolved) throw *unresolved;
  if (!verb_words.count(toks.front())) throw ParseError(ParseErrorKind::unknown_verb, toks.front());
  // Known verb, but the words after it fit no pattern.
  std::vector<std::string> rest(toks.begin() + 1, toks.end());
  throw ParseError(ParseErrorKind::unresolved_noun, text::join(rest, " "));
}

std::string render_command(const Command& cmd, const GameSpec& spec) {
  const std::string noun = cmd.noun.value_or("");
  const std::string second = cmd.second_noun.value_or("");
  if (cmd.verb == "look" || cmd.verb == "inventory") return cmd.verb;
  if (cmd.verb == "put-in") return "put " + noun + " in " + second;
  if (cmd.verb == "put-on") return "put " + noun + " on " + second;
  if (cmd.verb == "turn-on") return "turn on " + noun;
  if (cmd.verb == "turn-off") return "turn off " + noun;
  if (is_default_verb(cmd.verb)) return cmd.verb + " " + noun;
  const auto* act = spec.find_action(cmd.verb);
  if (!act) return cmd.raw;
  std::vector<std::string> words;
  for (const auto& part : parse_template(act->template_text)) {
    if (!part.is_slot) {
      words.push_back(part.text);
      continue;
    }
    auto it = cmd.slots.find(part.text);
    words.push_back(it == cmd.slots.end() ? "<" + part.text + ">" : it->second);
  }
  return text::join(words, " ");
}

}  // namespace skillgym
