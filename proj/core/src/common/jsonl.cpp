#include "dr/jsonl.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "dr/error.hpp"

namespace dr {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Json> parse_jsonl(const std::string& content) {
  std::vector<Json> rows;
  std::istringstream in(content);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      rows.push_back(Json::parse(line));
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

std::vector<Json> read_jsonl(const fs::path& path) {
  try {
    return parse_jsonl(read_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParse) {
      throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
    }
    throw;
  }
}

std::string to_jsonl(const std::vector<Json>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += r.dump();
    out.push_back('\n');
  }
  return out;
}

void write_jsonl(const fs::path& path, const std::vector<Json>& rows) {
  write_file_atomic(path, to_jsonl(rows));
}

Json read_json_file(const fs::path& path) {
  const auto content = read_file(path);
  try {
    return Json::parse(content);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorCode::kIo, "short write to " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot rename into " + path.string());
  }
}

JsonlAppender::JsonlAppender(fs::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path_.parent_path(), ec);
  }
  fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    throw Error(ErrorCode::kIo, "cannot open " + path_.string() + ": " + std::strerror(errno));
  }
}

JsonlAppender::~JsonlAppender() {
  if (fd_ >= 0) ::close(fd_);
}

void JsonlAppender::append(const Json& row) {
  std::string line = row.dump();
  line.push_back('\n');
  std::size_t off = 0;
  while (off < line.size()) {
    const auto n = ::write(fd_, line.data() + off, line.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kIo, "append to " + path_.string() + " failed: " + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
  ::fdatasync(fd_);
}

namespace {

// End (exclusive) of the balanced {...} or [...] starting at `begin`, or npos.
std::size_t balanced_end(std::string_view s, std::size_t begin) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = begin; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{' || c == '[') {
      ++depth;
    } else if (c == '}' || c == ']') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

}  // namespace

std::optional<Json> extract_json(std::string_view text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{' && text[i] != '[') continue;
    const auto end = balanced_end(text, i);
    if (end == std::string_view::npos) continue;
    auto parsed = Json::parse(text.substr(i, end - i), nullptr, false);
    if (!parsed.is_discarded()) return parsed;
  }
  return std::nullopt;
}

}  // namespace dr
