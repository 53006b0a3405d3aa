#pragma once

#include <filesystem>
#include <memory>

#include "dr/agent/episode.hpp"
#include "dr/agent/tools.hpp"
#include "dr/toolkit/executor.hpp"
#include "dr/toolkit/offload.hpp"
#include "dr/toolkit/todo.hpp"

namespace dr::toolkit {

/// `patch` tool: {"path", "anchor", "replacement", "min_similarity"?}. Paths
/// are resolved inside `workspace` and may not escape it.
std::shared_ptr<agent::Tool> make_patch_tool(std::filesystem::path workspace);

/// `file.read` tool: {"path", "offset"?, "length"?}; pages through files in
/// `workspace` or the offloader's spill directory.
std::shared_ptr<agent::Tool> make_file_read_tool(std::filesystem::path workspace,
                                                 std::filesystem::path spill_dir);

/// `todo` tool backed by a persistent store.
std::shared_ptr<agent::Tool> make_todo_tool(std::shared_ptr<TodoStore> store);

/// `shell` tool: {"command"}.
std::shared_ptr<agent::Tool> make_shell_tool(std::shared_ptr<CommandExecutor> executor);

/// Episode hook that offloads oversized observations.
std::function<agent::ToolResult(agent::ToolResult, const agent::ToolCall&)> make_offload_hook(
    std::shared_ptr<Offloader> offloader);

}  // namespace dr::toolkit
