#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "dr/agent/trajectory.hpp"

namespace dr::agent {

struct ToolResult {
  std::string content;
  bool is_error = false;
  bool offloaded = false;
  std::vector<Source> sources;
};

class Tool {
 public:
  virtual ~Tool() = default;
  virtual std::string name() const = 0;
  virtual std::string description() const { return {}; }
  /// May throw; the episode turns exceptions into error observations.
  virtual ToolResult invoke(const Json& arguments) = 0;
};

class FunctionTool : public Tool {
 public:
  using Fn = std::function<ToolResult(const Json&)>;
  FunctionTool(std::string name, std::string description, Fn fn)
      : name_(std::move(name)), description_(std::move(description)), fn_(std::move(fn)) {}

  std::string name() const override { return name_; }
  std::string description() const override { return description_; }
  ToolResult invoke(const Json& arguments) override { return fn_(arguments); }

 private:
  std::string name_;
  std::string description_;
  Fn fn_;
};

class ToolRegistry {
 public:
  /// Throws dr::Error(kInvalidArgument) on a duplicate name.
  void add(std::shared_ptr<Tool> tool);
  Tool* find(std::string_view name) const;
  std::vector<std::string> names() const;
  bool empty() const { return tools_.empty(); }

 private:
  std::map<std::string, std::shared_ptr<Tool>, std::less<>> tools_;
};

}  // namespace dr::agent
