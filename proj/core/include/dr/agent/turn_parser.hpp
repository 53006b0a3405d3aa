#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "dr/agent/trajectory.hpp"
#include "dr/error.hpp"

namespace dr::agent {

inline constexpr std::string_view kToolCallOpen = "<tool_call>";
inline constexpr std::string_view kToolCallClose = "</tool_call>";

/// Raised for malformed tool-call blocks; [begin, end) is the offending byte span.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t begin, std::size_t end)
      : Error(ErrorCode::kParse, message), begin_(begin), end_(end) {}

  std::size_t begin() const { return begin_; }
  std::size_t end() const { return end_; }

 private:
  std::size_t begin_;
  std::size_t end_;
};

/// Parses one complete policy turn. Tool calls are written as
///   <tool_call>{"name": "...", "arguments": {...}}</tool_call>
/// A turn without any block is a final report whose text is the raw turn.
/// Prose around blocks is kept as reasoning.
TurnAction parse_model_turn(std::string_view raw);

/// Renders a call in the same block syntax the parser accepts.
std::string format_tool_call(const ToolCall& call);

}  // namespace dr::agent
