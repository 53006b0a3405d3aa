#include "dr/agent/turn_parser.hpp"

#include "dr/text.hpp"

namespace dr::agent {

TurnAction parse_model_turn(std::string_view raw) {
  TurnAction action;
  std::string reasoning;
  std::size_t pos = 0;
  bool saw_block = false;
  while (true) {
    const auto open = raw.find(kToolCallOpen, pos);
    const auto stray_close = raw.find(kToolCallClose, pos);
    if (stray_close != std::string_view::npos &&
        (open == std::string_view::npos || stray_close < open)) {
      throw ParseError("closing tool-call tag without an opening tag", stray_close,
                       stray_close + kToolCallClose.size());
    }
    if (open == std::string_view::npos) {
      reasoning.append(raw.substr(pos));
      break;
    }
    saw_block = true;
    reasoning.append(raw.substr(pos, open - pos));
    const auto body_begin = open + kToolCallOpen.size();
    const auto close = raw.find(kToolCallClose, body_begin);
    if (close == std::string_view::npos) {
      throw ParseError("unterminated tool-call block", open, raw.size());
    }
    const auto nested = raw.find(kToolCallOpen, body_begin);
    if (nested != std::string_view::npos && nested < close) {
      throw ParseError("unterminated tool-call block", open, nested);
    }
    const auto body = raw.substr(body_begin, close - body_begin);
    Json j;
    try {
      j = Json::parse(body);
    } catch (const Json::parse_error& e) {
      throw ParseError(std::string("tool-call body is not valid JSON: ") + e.what(), body_begin,
                       close);
    }
    if (!j.is_object() || !j.contains("name") || !j["name"].is_string() ||
        j["name"].get<std::string>().empty()) {
      throw ParseError("tool-call body needs a nonempty string \"name\"", body_begin, close);
    }
    ToolCall call;
    call.name = j["name"].get<std::string>();
    if (j.contains("arguments")) {
      if (!j["arguments"].is_object()) {
        throw ParseError("tool-call \"arguments\" must be an object", body_begin, close);
      }
      call.arguments = j["arguments"];
    }
    action.calls.push_back(std::move(call));
    pos = close + kToolCallClose.size();
  }
  if (!saw_block) {
    action.kind = TurnAction::Kind::kFinalReport;
    action.report_text = std::string(raw);
    return action;
  }
  action.kind = TurnAction::Kind::kToolCalls;
  action.reasoning = text::trim(reasoning);
  return action;
}

std::string format_tool_call(const ToolCall& call) {
  Json j{{"name", call.name}, {"arguments", call.arguments}};
  return std::string(kToolCallOpen) + j.dump() + std::string(kToolCallClose);
}

}  // namespace dr::agent
