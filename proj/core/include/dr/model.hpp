#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace dr {

struct Message {
  std::string role;
  std::string content;

  bool operator==(const Message&) const = default;
};

struct ModelRequest {
  std::vector<Message> messages;
  std::size_t max_tokens = 16384;
  double temperature = 0.0;
};

struct ModelResponse {
  std::string text;
  // Completion tokens reported by the backend, when it reports usage.
  std::optional<std::size_t> completion_tokens;
};

/// Contract every policy, judge and synthesis model satisfies. Transport
/// failures throw dr::Error(kTransport).
class ModelClient {
 public:
  virtual ~ModelClient() = default;
  virtual ModelResponse complete(const ModelRequest& request) = 0;
};

/// Replays canned responses in order. Thread-safe; records every request.
class ScriptedModelClient : public ModelClient {
 public:
  using Responder = std::function<ModelResponse(const ModelRequest&, std::size_t call_index)>;

  explicit ScriptedModelClient(std::vector<std::string> replies);
  explicit ScriptedModelClient(std::vector<ModelResponse> replies);
  explicit ScriptedModelClient(Responder responder);

  ModelResponse complete(const ModelRequest& request) override;

  std::size_t calls() const;
  std::vector<ModelRequest> requests() const;

 private:
  mutable std::mutex mu_;
  Responder responder_;
  std::vector<ModelRequest> requests_;
};

/// Loads a script file: JSON Lines where each row is either a string or an
/// object {"text": ..., "completion_tokens": n}.
std::unique_ptr<ScriptedModelClient> load_scripted_client(const std::filesystem::path& path);

struct HttpModelConfig {
  std::string base_url;  // e.g. "https://api.example.com"
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string api_key_env = "MODEL_API_KEY";
  std::chrono::seconds timeout{300};
};

/// Chat-completions client over HTTP(S) with a bearer credential taken from
/// the environment variable named in the config.
class HttpModelClient : public ModelClient {
 public:
  explicit HttpModelClient(HttpModelConfig config);
  ModelResponse complete(const ModelRequest& request) override;

 private:
  HttpModelConfig config_;
  std::string api_key_;
};

}  // namespace dr
