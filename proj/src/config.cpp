#include "skillgym/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "skillgym/text.hpp"

namespace skillgym::config {

Config Config::parse(std::string_view body) {
  Config cfg;
  std::string section;
  std::istringstream in{std::string(body)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto line = text::trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
      section = text::trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    auto key = text::trim(line.substr(0, eq));
    auto value = text::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    cfg.values_[section.empty() ? key : section + "." + key] = value;
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::optional<std::string> Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Config::get_or(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

LlmSettings llm_settings(const Config& cfg, const LlmSettings& flags) {
  LlmSettings s;
  s.base_url = cfg.get_or("llm.base_url", s.base_url);
  s.model = cfg.get_or("llm.model", s.model);
  s.api_key = cfg.get_or("llm.api_key", "");
  s.fixtures_dir = cfg.get_or("llm.fixtures_dir", "");
  if (!flags.base_url.empty() && flags.base_url != LlmSettings{}.base_url) s.base_url = flags.base_url;
  if (!flags.model.empty() && flags.model != LlmSettings{}.model) s.model = flags.model;
  if (!flags.api_key.empty()) s.api_key = flags.api_key;
  if (!flags.fixtures_dir.empty()) s.fixtures_dir = flags.fixtures_dir;
  if (const char* env = std::getenv(kApiKeyEnv); env && *env) s.api_key = env;
  return s;
}

}  // namespace skillgym::config
