#pragma once

#include <functional>
#include <string>

#include "dr/agent/tools.hpp"
#include "dr/agent/trajectory.hpp"
#include "dr/model.hpp"

namespace dr::agent {

struct EpisodeHooks {
  // Applied to every tool result before it becomes an observation; the
  // toolkit's offloader plugs in here.
  std::function<ToolResult(ToolResult, const ToolCall&)> post_process;
  // Replaces the default system prompt when set. Receives the rendered date.
  std::function<std::string(const std::string& now, const ToolRegistry&)> system_prompt;
  // Called between transport retries; defaults to sleeping.
  std::function<void(std::chrono::milliseconds)> sleep;
};

std::string default_system_prompt(const std::string& now, const ToolRegistry& tools);

/// Runs one ReAct episode. Never throws for policy or tool failures: those
/// end the episode with Termination::kError. Throws dr::Error only for an
/// invalid config or empty query.
Trajectory run_episode(const std::string& query, const EpisodeConfig& config,
                       ModelClient& policy, ToolRegistry& tools,
                       const EpisodeHooks& hooks = {});

}  // namespace dr::agent
