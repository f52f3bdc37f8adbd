#pragma once

// Game generation from a short idea: k-shot prompt construction, completion
// clients, response sectioning and conversion into a GameSpec.

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "skillgym/gamespec.hpp"

namespace skillgym::llmgen {

struct GameIdea {
  std::string idea_text;
  std::vector<std::string> required_skills;

  std::string slug() const;
};

struct ExampleBlock {
  std::string idea;
  std::string sections_text;  // "Task sequence:\n...\nObjects:\n...\nActions:\n..."
};

struct PromptTemplate {
  static constexpr const char* kMarker = "{{idea}}";

  std::string instruction_header;
  std::vector<ExampleBlock> example_blocks;
  // Text placed after the examples; contains kMarker exactly once.
  std::string target_text = "Game idea: {{idea}}\n";
};

// Built-in template: `k` example games and `action_examples` sample skill
// templates listed in the header.
PromptTemplate default_template(std::size_t k = 3, std::size_t action_examples = 4);

std::string build_prompt(const GameIdea& idea, const PromptTemplate& tpl);

struct ObjectLine {
  std::string name;
  std::string type;
  std::string location;
  std::vector<std::string> properties;
  std::string description;
  bool operator==(const ObjectLine&) const = default;
};

struct ActionBlock {
  std::string template_text;
  std::vector<std::string> requires_;
  std::vector<std::string> effects;
  std::string success;
  std::string failure;
  std::vector<std::string> aliases;
  bool operator==(const ActionBlock&) const = default;
};

struct ParsedSections {
  // Each step holds one action, or several mutually unordered ones.
  std::vector<std::vector<std::string>> task_sequence;
  std::vector<ObjectLine> objects;
  // Empty means the response did not restrict the built-in verbs.
  std::vector<std::string> default_actions;
  std::vector<ActionBlock> custom_actions;
  bool operator==(const ParsedSections&) const = default;
};

class MissingSection : public std::runtime_error {
 public:
  explicit MissingSection(std::string name)
      : std::runtime_error("missing section: " + name), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class EmptySection : public std::runtime_error {
 public:
  explicit EmptySection(std::string name) : std::runtime_error("empty section: " + name), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class DuplicateEntity : public std::runtime_error {
 public:
  explicit DuplicateEntity(std::string name)
      : std::runtime_error("duplicate object: " + name), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class UnmappableAction : public std::runtime_error {
 public:
  explicit UnmappableAction(std::string text, const std::string& why = "")
      : std::runtime_error("cannot map action '" + text + "'" + (why.empty() ? "" : ": " + why)),
        text_(std::move(text)) {}
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

ParsedSections parse_response(std::string_view raw);

// Canonical text form; parse_response(render_sections(x)) == x.
std::string render_sections(const ParsedSections& sections);

// Throws DuplicateEntity, UnmappableAction, or SpecError for everything else.
GameSpec sections_to_spec(const ParsedSections& sections, const GameIdea& idea);

struct CompletionRequest {
  std::string prompt;
  std::string idea_slug;
  int attempt = 1;
  double temperature = 0.7;
  int max_tokens = 1500;
};

class ClientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CompletionClient {
 public:
  virtual ~CompletionClient() = default;
  virtual std::string complete(const CompletionRequest& request) = 0;
};

// Serves `<slug>.<attempt>.resp.txt` when present, else `<slug>.resp.txt`.
class FixtureClient : public CompletionClient {
 public:
  explicit FixtureClient(std::filesystem::path dir);
  std::string complete(const CompletionRequest& request) override;

 private:
  std::filesystem::path dir_;
};

// OpenAI-compatible chat/completions endpoint.
class HttpClient : public CompletionClient {
 public:
  HttpClient(std::string base_url, std::string model, std::string api_key);
  std::string complete(const CompletionRequest& request) override;

 private:
  std::string base_url_;
  std::string model_;
  std::string api_key_;
};

struct GenerationConfig {
  std::size_t k_shots = 3;
  std::size_t action_examples = 4;
  int max_retries = 5;
  double temperature = 0.7;
  int max_tokens = 1500;
};

class GenerationFailed : public std::runtime_error {
 public:
  GenerationFailed(int attempts, std::vector<std::string> errors);
  int attempts() const { return attempts_; }
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  int attempts_;
  std::vector<std::string> errors_;
};

struct GenerationResult {
  GameSpec spec;
  int attempts = 0;
  std::string raw_response;
  std::vector<std::string> errors;  // one per rejected attempt
};

GenerationResult generate_game(const GameIdea& idea, CompletionClient& client, const GenerationConfig& config = {});

// Writes <slug>.game.json and <slug>.meta.json into dir; returns the .game.json path.
std::filesystem::path write_generation(const GenerationResult& result, const GameIdea& idea,
                                       const std::filesystem::path& dir);

}  // namespace skillgym::llmgen
