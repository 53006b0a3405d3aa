#include "dr/agent/tools.hpp"

#include "dr/error.hpp"

namespace dr::agent {

void ToolRegistry::add(std::shared_ptr<Tool> tool) {
  auto name = tool->name();
  if (tools_.count(name)) throw Error(ErrorCode::kInvalidArgument, "duplicate tool: " + name);
  tools_.emplace(std::move(name), std::move(tool));
}

Tool* ToolRegistry::find(std::string_view name) const {
  auto it = tools_.find(name);
  return it == tools_.end() ? nullptr : it->second.get();
}

std::vector<std::string> ToolRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : tools_) out.push_back(name);
  return out;
}

}  // namespace dr::agent
