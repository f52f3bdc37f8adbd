#pragma once

// Verb/noun command grammar shared by the runtime parser and spec validation.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "skillgym/gamespec.hpp"

namespace skillgym {

// One element of a command template: a literal word or a typed slot.
struct TemplatePart {
  bool is_slot = false;
  std::string text;  // literal word, or slot name
  std::string kind;  // slot kind: an EntityKind name or "object"
  bool operator==(const TemplatePart&) const = default;
};

// "fill <container> with water" -> [fill, <container>, with, water].
// Slots are written <kind>, <name> (kind object) or <name:kind>.
// Throws std::invalid_argument on malformed templates.
std::vector<TemplatePart> parse_template(std::string_view tpl);
std::vector<TemplatePart> template_slots(std::string_view tpl);
bool slot_accepts(const TemplatePart& slot, const Entity& entity);

struct Command {
  std::string verb;  // default verb name or custom action name
  std::optional<std::string> noun;
  std::optional<std::string> preposition;
  std::optional<std::string> second_noun;
  std::string raw;
  // Custom actions only: slot name -> entity name.
  std::map<std::string, std::string> slots;

  bool is_custom() const { return !slots.empty() || !is_default_verb(verb); }
  bool operator==(const Command&) const = default;
};

enum class ParseErrorKind { unknown_verb, unresolved_noun, ambiguous_noun };

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, std::string phrase, std::vector<std::string> candidates = {});
  ParseErrorKind kind() const { return kind_; }
  const std::string& phrase() const { return phrase_; }
  const std::vector<std::string>& candidates() const { return candidates_; }

 private:
  ParseErrorKind kind_;
  std::string phrase_;
  std::vector<std::string> candidates_;
};

// Ranks entities (by index into spec.entities) when a noun phrase matches
// several of them; higher wins. An empty function ranks all equally.
using NounPreference = std::function<int(std::size_t)>;

// Lower-cases, drops articles, matches custom templates (and aliases) and then
// the built-in verb patterns. Noun phrases resolve by exact name first, then
// by contiguous word match.
Command parse_command_text(std::string_view text, const GameSpec& spec,
                           const NounPreference& prefer = {});

// Parser with the game's patterns precompiled. Holds a reference to the GameSpec,
// which must outlive it.
class CommandGrammar {
 public:
  explicit CommandGrammar(const GameSpec& spec);
  Command parse(std::string_view text, const NounPreference& prefer = {}) const;

 private:
  struct Impl;
  const GameSpec* spec_;
  std::shared_ptr<const Impl> impl_;
};

// Canonical spelling: "take pot", "put pasta in pot", "turn on stove",
// custom templates with slot fillers substituted.
std::string render_command(const Command& cmd, const GameSpec& spec);

// Words normalized the way the parser sees them (articles removed).
std::vector<std::string> normalized_words(std::string_view s);

}  // namespace skillgym
