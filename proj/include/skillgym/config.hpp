#pragma once

// key = value settings with optional [section] headers. Keys inside a
// section are stored as "section.key".

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

namespace skillgym::config {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Config {
 public:
  static Config parse(std::string_view text);
  static Config load(const std::filesystem::path& path);

  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

inline constexpr const char* kApiKeyEnv = "SKILLGYM_API_KEY";

struct LlmSettings {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-4";
  std::string api_key;
  std::string fixtures_dir;
};

// Config values, then non-empty flag overrides, then the environment
// variable for the API key.
LlmSettings llm_settings(const Config& cfg, const LlmSettings& flags = {});

}  // namespace skillgym::config
