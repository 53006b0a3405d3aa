#pragma once

#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace dr::toolkit {

struct CommandResult {
  int exit_code = 0;
  std::string output;
};

/// Terminal abstraction behind the `shell` tool. Real sandboxes implement
/// this; tests use ScriptedExecutor.
class CommandExecutor {
 public:
  virtual ~CommandExecutor() = default;
  virtual CommandResult run(const std::string& command) = 0;
};

class ScriptedExecutor : public CommandExecutor {
 public:
  void on(std::string command, CommandResult result);
  CommandResult run(const std::string& command) override;
  std::vector<std::string> history() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, CommandResult> responses_;
  std::vector<std::string> history_;
};

}  // namespace dr::toolkit
