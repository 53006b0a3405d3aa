#include "dr/toolkit/agent_tools.hpp"

#include <fmt/format.h>

#include "dr/error.hpp"
#include "dr/toolkit/patch.hpp"

namespace dr::toolkit {

namespace fs = std::filesystem;
using agent::Json;
using agent::ToolResult;

namespace {

// Resolves `rel` under `root`, rejecting paths that escape it.
std::optional<fs::path> confine(const fs::path& root, const std::string& rel) {
  const auto base = fs::weakly_canonical(root);
  const auto full = fs::weakly_canonical(fs::path(rel).is_absolute() ? fs::path(rel) : base / rel);
  const auto b = base.string();
  const auto f = full.string();
  if (f == b || (f.size() > b.size() && f.compare(0, b.size(), b) == 0 && f[b.size()] == '/')) {
    return full;
  }
  return std::nullopt;
}

ToolResult error_result(std::string message) { return {std::move(message), true, false, {}}; }

}  // namespace

std::shared_ptr<agent::Tool> make_patch_tool(fs::path workspace) {
  return std::make_shared<agent::FunctionTool>(
      "patch",
      "Edit a file in place: {\"path\", \"anchor\" (current text with a little context), "
      "\"replacement\"}.",
      [workspace = std::move(workspace)](const Json& args) -> ToolResult {
        const auto target = confine(workspace, args.value("path", std::string{}));
        if (!target) return error_result("path is outside the workspace");
        PatchRequest req;
        req.target_path = *target;
        req.anchor = args.value("anchor", std::string{});
        req.replacement = args.value("replacement", std::string{});
        req.min_similarity = args.value("min_similarity", 0.85);
        try {
          const auto r = apply_patch(req);
          return {fmt::format("patched {} ({} match, similarity {:.3f})", args.value("path", ""),
                              r.match_kind == MatchKind::kExact ? "exact" : "fuzzy", r.similarity),
                  false, false, {}};
        } catch (const Error& e) {
          return error_result(fmt::format("{}: {}", error_code_name(e.code()), e.what()));
        }
      });
}

std::shared_ptr<agent::Tool> make_file_read_tool(fs::path workspace, fs::path spill_dir) {
  return std::make_shared<agent::FunctionTool>(
      "file.read", "Read a byte range of a file: {\"path\", \"offset\"?, \"length\"?}.",
      [workspace = std::move(workspace), spill_dir = std::move(spill_dir)](const Json& args) -> ToolResult {
        const auto rel = args.value("path", std::string{});
        auto target = confine(spill_dir, rel);
        if (!target || !fs::exists(*target)) target = confine(workspace, rel);
        if (!target) return error_result("path is outside the readable roots");
        const auto offset = args.value("offset", std::size_t{0});
        const auto length = args.value("length", kDefaultOffloadThreshold);
        try {
          return {read_page(*target, offset, length), false, false, {}};
        } catch (const Error& e) {
          return error_result(e.what());
        }
      });
}

std::shared_ptr<agent::Tool> make_todo_tool(std::shared_ptr<TodoStore> store) {
  return std::make_shared<agent::FunctionTool>(
      "todo",
      "Manage the research task list: {\"titles\": [...]} creates, {\"id\", \"status\"/\"title\"} "
      "rewrites, {\"ids\": [...]} destroys.",
      [store = std::move(store)](const Json& args) -> ToolResult {
        try {
          const auto state = store->apply(parse_todo_instruction(args));
          return {to_json(state).dump(), false, false, {}};
        } catch (const Error& e) {
          return error_result(fmt::format("{}: {}", error_code_name(e.code()), e.what()));
        }
      });
}

std::shared_ptr<agent::Tool> make_shell_tool(std::shared_ptr<CommandExecutor> executor) {
  return std::make_shared<agent::FunctionTool>(
      "shell", "Run a command in the sandbox: {\"command\"}.",
      [executor = std::move(executor)](const Json& args) -> ToolResult {
        const auto cmd = args.value("command", std::string{});
        if (cmd.empty()) return error_result("command is empty");
        const auto r = executor->run(cmd);
        return {fmt::format("exit code {}\n{}", r.exit_code, r.output), r.exit_code != 0, false, {}};
      });
}

std::function<ToolResult(ToolResult, const agent::ToolCall&)> make_offload_hook(
    std::shared_ptr<Offloader> offloader) {
  return [offloader = std::move(offloader)](ToolResult r, const agent::ToolCall&) {
    auto outcome = offloader->offload(std::move(r.content));
    if (auto* inl = std::get_if<InlinePayload>(&outcome)) {
      r.content = std::move(inl->payload);
    } else {
      r.content = std::move(std::get<OffloadRecord>(outcome).summary);
      r.offloaded = true;
    }
    return r;
  };
}

}  // namespace dr::toolkit
