#include "dr/toolkit/executor.hpp"

namespace dr::toolkit {

void ScriptedExecutor::on(std::string command, CommandResult result) {
  std::lock_guard lock(mu_);
  responses_[std::move(command)] = std::move(result);
}

CommandResult ScriptedExecutor::run(const std::string& command) {
  std::lock_guard lock(mu_);
  history_.push_back(command);
  auto it = responses_.find(command);
  if (it == responses_.end()) return {127, "command not found: " + command};
  return it->second;
}

std::vector<std::string> ScriptedExecutor::history() const {
  std::lock_guard lock(mu_);
  return history_;
}

}  // namespace dr::toolkit
