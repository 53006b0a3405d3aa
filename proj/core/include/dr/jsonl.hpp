#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace dr {

using Json = nlohmann::json;

std::vector<Json> read_jsonl(const std::filesystem::path& path);
std::vector<Json> parse_jsonl(const std::string& content);
std::string to_jsonl(const std::vector<Json>& rows);
void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& rows);

Json read_json_file(const std::filesystem::path& path);
std::string read_file(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// First JSON object or array embedded in free text (model replies often wrap
/// JSON in prose or code fences). nullopt when none parses.
std::optional<Json> extract_json(std::string_view text);

/// Appends one line and flushes it to stable storage before returning.
class JsonlAppender {
 public:
  explicit JsonlAppender(std::filesystem::path path);
  ~JsonlAppender();
  JsonlAppender(const JsonlAppender&) = delete;
  JsonlAppender& operator=(const JsonlAppender&) = delete;

  void append(const Json& row);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
};

}  // namespace dr
