#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace dr::toolkit {

enum class TodoStatus { kPending, kInProgress, kDone, kCancelled };

std::string_view to_string(TodoStatus s);
std::optional<TodoStatus> parse_todo_status(std::string_view s);

struct TodoItem {
  std::string id;
  std::string title;
  TodoStatus status = TodoStatus::kPending;

  bool operator==(const TodoItem&) const = default;
};

struct TodoState {
  std::vector<TodoItem> items;
  std::size_t revision = 0;
  std::size_t next_id = 1;  // ids are never reused after destroy

  bool operator==(const TodoState&) const = default;
};

struct TodoCreate {
  std::vector<std::string> titles;
};

struct TodoRewrite {
  std::string id;
  std::optional<std::string> title;
  std::optional<TodoStatus> status;
};

struct TodoDestroy {
  std::vector<std::string> ids;
};

using TodoMutation = std::variant<TodoCreate, TodoRewrite, TodoDestroy>;

/// Applies one mutation and bumps the revision by one. Unknown ids throw
/// dr::Error(kUnknownId); the input state is never modified.
TodoState todo_apply(const TodoState& state, const TodoMutation& mutation);

/// Single entry point used by the `todo` tool: {"titles": [...]} creates,
/// {"id": ..., "title"/"status": ...} rewrites, {"ids": [...]} destroys. An
/// explicit "op" field overrides the inference.
TodoMutation parse_todo_instruction(const nlohmann::json& args);

nlohmann::json to_json(const TodoState& s);
TodoState todo_state_from_json(const nlohmann::json& j);

/// Todo state persisted as one JSON document. Mutations hold an exclusive
/// lock on a sidecar lock file and are durable before apply() returns.
class TodoStore {
 public:
  explicit TodoStore(std::filesystem::path file);

  TodoState load() const;
  TodoState apply(const TodoMutation& mutation);

  const std::filesystem::path& file() const { return file_; }

 private:
  std::filesystem::path file_;
};

}  // namespace dr::toolkit
