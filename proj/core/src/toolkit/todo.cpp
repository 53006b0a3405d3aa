#include "dr/toolkit/todo.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>

#include "dr/error.hpp"
#include "dr/jsonl.hpp"
#include "dr/text.hpp"

namespace dr::toolkit {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(TodoStatus s) {
  switch (s) {
    case TodoStatus::kPending: return "pending";
    case TodoStatus::kInProgress: return "in_progress";
    case TodoStatus::kDone: return "done";
    case TodoStatus::kCancelled: return "cancelled";
  }
  return "pending";
}

std::optional<TodoStatus> parse_todo_status(std::string_view s) {
  for (auto st : {TodoStatus::kPending, TodoStatus::kInProgress, TodoStatus::kDone,
                  TodoStatus::kCancelled}) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

namespace {

struct Applier {
  TodoState& st;

  void operator()(const TodoCreate& c) const {
    if (c.titles.empty()) throw Error(ErrorCode::kInvalidArgument, "create needs at least one title");
    for (const auto& t : c.titles) {
      if (text::trim(t).empty()) throw Error(ErrorCode::kInvalidArgument, "todo titles must be nonempty");
    }
    for (const auto& t : c.titles) {
      st.items.push_back({"t" + std::to_string(st.next_id++), t, TodoStatus::kPending});
    }
  }

  void operator()(const TodoRewrite& r) const {
    auto it = std::find_if(st.items.begin(), st.items.end(),
                           [&](const TodoItem& i) { return i.id == r.id; });
    if (it == st.items.end()) throw Error(ErrorCode::kUnknownId, "unknown todo id: " + r.id);
    if (r.title) {
      if (text::trim(*r.title).empty()) {
        throw Error(ErrorCode::kInvalidArgument, "todo titles must be nonempty");
      }
      it->title = *r.title;
    }
    if (r.status) it->status = *r.status;
  }

  void operator()(const TodoDestroy& d) const {
    if (d.ids.empty()) throw Error(ErrorCode::kInvalidArgument, "destroy needs at least one id");
    for (const auto& id : d.ids) {
      const bool known = std::any_of(st.items.begin(), st.items.end(),
                                     [&](const TodoItem& i) { return i.id == id; });
      if (!known) throw Error(ErrorCode::kUnknownId, "unknown todo id: " + id);
    }
    std::erase_if(st.items, [&](const TodoItem& i) {
      return std::find(d.ids.begin(), d.ids.end(), i.id) != d.ids.end();
    });
  }
};

}  // namespace

TodoState todo_apply(const TodoState& state, const TodoMutation& mutation) {
  TodoState next = state;
  std::visit(Applier{next}, mutation);
  ++next.revision;
  return next;
}

TodoMutation parse_todo_instruction(const json& args) {
  if (!args.is_object()) throw Error(ErrorCode::kInvalidArgument, "todo arguments must be an object");
  std::string op = args.value("op", std::string{});
  if (op.empty()) {
    if (args.contains("titles")) {
      op = "create";
    } else if (args.contains("ids")) {
      op = "destroy";
    } else if (args.contains("id")) {
      op = "rewrite";
    } else {
      throw Error(ErrorCode::kInvalidArgument, "todo needs titles, id or ids");
    }
  }
  try {
    if (op == "create") return TodoCreate{args.at("titles").get<std::vector<std::string>>()};
    if (op == "destroy") return TodoDestroy{args.at("ids").get<std::vector<std::string>>()};
    if (op == "rewrite") {
      TodoRewrite r;
      r.id = args.at("id").get<std::string>();
      if (args.contains("title")) r.title = args["title"].get<std::string>();
      if (args.contains("status")) {
        r.status = parse_todo_status(args["status"].get<std::string>());
        if (!r.status) throw Error(ErrorCode::kInvalidArgument, "unknown todo status");
      }
      return r;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed todo instruction: ") + e.what());
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown todo op: " + op);
}

json to_json(const TodoState& s) {
  json items = json::array();
  for (const auto& i : s.items) {
    items.push_back({{"id", i.id}, {"title", i.title}, {"status", std::string(to_string(i.status))}});
  }
  return {{"items", items}, {"revision", s.revision}, {"next_id", s.next_id}};
}

TodoState todo_state_from_json(const json& j) {
  try {
    TodoState s;
    s.revision = j.at("revision").get<std::size_t>();
    s.next_id = j.value("next_id", std::size_t{1});
    for (const auto& i : j.at("items")) {
      auto status = parse_todo_status(i.at("status").get<std::string>());
      if (!status) throw Error(ErrorCode::kParse, "unknown todo status");
      s.items.push_back({i.at("id").get<std::string>(), i.at("title").get<std::string>(), *status});
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed todo state: ") + e.what());
  }
}

namespace {

class FileLock {
 public:
  explicit FileLock(const fs::path& path) {
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error(ErrorCode::kIo, "cannot open lock file " + path.string());
    while (::flock(fd_, LOCK_EX) != 0) {
      if (errno != EINTR) {
        ::close(fd_);
        throw Error(ErrorCode::kIo, "cannot lock " + path.string());
      }
    }
  }
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

fs::path lock_path(const fs::path& file) {
  auto p = file;
  p += ".lock";
  return p;
}

TodoState load_unlocked(const fs::path& file) {
  if (!fs::exists(file)) return {};
  return todo_state_from_json(read_json_file(file));
}

}  // namespace

TodoStore::TodoStore(fs::path file) : file_(std::move(file)) {
  if (file_.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(file_.parent_path(), ec);
  }
}

TodoState TodoStore::load() const {
  FileLock lock(lock_path(file_));
  return load_unlocked(file_);
}

TodoState TodoStore::apply(const TodoMutation& mutation) {
  FileLock lock(lock_path(file_));
  auto next = todo_apply(load_unlocked(file_), mutation);
  write_file_atomic(file_, to_json(next).dump(2) + "\n");
  return next;
}

}  // namespace dr::toolkit
