// OpenAI-compatible chat/completions client.

#include <httplib.h>

#include <json.hpp>

#include "skillgym/llmgen.hpp"

namespace skillgym::llmgen {

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // prefix such as /v1
};

Endpoint split_url(const std::string& url) {
  auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ClientError("base url needs a scheme: " + url);
  auto slash = url.find('/', scheme + 3);
  Endpoint ep;
  ep.origin = url.substr(0, slash);
  ep.path = slash == std::string::npos ? "" : url.substr(slash);
  while (!ep.path.empty() && ep.path.back() == '/') ep.path.pop_back();
  return ep;
}

}  // namespace

HttpClient::HttpClient(std::string base_url, std::string model, std::string api_key)
    : base_url_(std::move(base_url)), model_(std::move(model)), api_key_(std::move(api_key)) {}

std::string HttpClient::complete(const CompletionRequest& request) {
  const auto ep = split_url(base_url_);
  nlohmann::json body = {
      {"model", model_},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
      {"temperature", request.temperature},
      {"max_tokens", request.max_tokens},
  };
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  httplib::Result res;
  try {
    httplib::Client cli(ep.origin);
    cli.set_connection_timeout(10);
    cli.set_read_timeout(120);
    res = cli.Post(ep.path + "/chat/completions", headers, body.dump(), "application/json");
  } catch (const std::exception& e) {
    throw ClientError(std::string("request failed: ") + e.what());
  }
  if (!res) throw ClientError("request failed: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw ClientError("endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
  try {
    auto reply = nlohmann::json::parse(res->body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ClientError(std::string("unexpected response body: ") + e.what());
  }
}

}  // namespace skillgym::llmgen
