#include "dr/model.hpp"

#include <cstdlib>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "dr/error.hpp"
#include "dr/jsonl.hpp"

namespace dr {

ScriptedModelClient::ScriptedModelClient(std::vector<std::string> replies)
    : responder_([replies = std::move(replies)](const ModelRequest&, std::size_t i) {
        if (i >= replies.size()) throw Error(ErrorCode::kTransport, "scripted model exhausted");
        return ModelResponse{replies[i], std::nullopt};
      }) {}

ScriptedModelClient::ScriptedModelClient(std::vector<ModelResponse> replies)
    : responder_([replies = std::move(replies)](const ModelRequest&, std::size_t i) {
        if (i >= replies.size()) throw Error(ErrorCode::kTransport, "scripted model exhausted");
        return replies[i];
      }) {}

ScriptedModelClient::ScriptedModelClient(Responder responder)
    : responder_(std::move(responder)) {}

ModelResponse ScriptedModelClient::complete(const ModelRequest& request) {
  std::size_t index = 0;
  {
    std::lock_guard lock(mu_);
    index = requests_.size();
    requests_.push_back(request);
  }
  return responder_(request, index);
}

std::size_t ScriptedModelClient::calls() const {
  std::lock_guard lock(mu_);
  return requests_.size();
}

std::vector<ModelRequest> ScriptedModelClient::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

std::unique_ptr<ScriptedModelClient> load_scripted_client(const std::filesystem::path& path) {
  std::vector<ModelResponse> replies;
  for (const auto& row : read_jsonl(path)) {
    if (row.is_string()) {
      replies.push_back({row.get<std::string>(), std::nullopt});
    } else if (row.is_object() && row.contains("text")) {
      ModelResponse r{row.at("text").get<std::string>(), std::nullopt};
      if (row.contains("completion_tokens")) {
        r.completion_tokens = row.at("completion_tokens").get<std::size_t>();
      }
      replies.push_back(std::move(r));
    } else {
      throw Error(ErrorCode::kParse, path.string() + ": script rows must be strings or {text}");
    }
  }
  return std::make_unique<ScriptedModelClient>(std::move(replies));
}

HttpModelClient::HttpModelClient(HttpModelConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "model base_url is empty");
  }
  if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
}

ModelResponse HttpModelClient::complete(const ModelRequest& request) {
  nlohmann::json body;
  body["model"] = config_.model;
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  auto& msgs = body["messages"] = nlohmann::json::array();
  for (const auto& m : request.messages) msgs.push_back({{"role", m.role}, {"content", m.content}});

  httplib::Client cli(config_.base_url);
  const auto secs = static_cast<time_t>(config_.timeout.count());
  cli.set_connection_timeout(secs, 0);
  cli.set_read_timeout(secs, 0);
  cli.set_write_timeout(secs, 0);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  auto res = cli.Post(config_.path, headers, body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::kTransport, "model request failed: " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorCode::kTransport, "model backend returned HTTP " + std::to_string(res->status));
  }
  try {
    const auto j = nlohmann::json::parse(res->body);
    ModelResponse out;
    out.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
    if (j.contains("usage") && j["usage"].contains("completion_tokens")) {
      out.completion_tokens = j["usage"]["completion_tokens"].get<std::size_t>();
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kTransport, std::string("malformed model response: ") + e.what());
  }
}

}  // namespace dr
