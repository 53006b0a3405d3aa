#include "dr/agent/trajectory.hpp"

#include "dr/error.hpp"

namespace dr::agent {

void EpisodeConfig::validate() const {
  if (max_turns < 1) throw Error(ErrorCode::kInvalidArgument, "max_turns must be >= 1");
  if (max_tokens_per_turn == 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_tokens_per_turn must be positive");
  }
  if (tool_call_budget == 0) throw Error(ErrorCode::kInvalidArgument, "tool_call_budget must be positive");
  if (total_token_budget == 0) {
    throw Error(ErrorCode::kInvalidArgument, "total_token_budget must be positive");
  }
}

std::size_t Trajectory::total_tool_calls() const {
  std::size_t n = 0;
  for (const auto& s : steps) {
    if (s.action) n += s.action->calls.size();
  }
  return n;
}

std::size_t Trajectory::total_observations() const {
  std::size_t n = 0;
  for (const auto& s : steps) n += s.observations.size();
  return n;
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::kPlanningReflection: return "planning_reflection";
    case Phase::kToolExecution: return "tool_execution";
    case Phase::kFeedbackValidation: return "feedback_validation";
  }
  return "planning_reflection";
}

namespace {

Phase parse_phase(std::string_view s) {
  if (s == "tool_execution") return Phase::kToolExecution;
  if (s == "feedback_validation") return Phase::kFeedbackValidation;
  if (s == "planning_reflection") return Phase::kPlanningReflection;
  throw Error(ErrorCode::kParse, "unknown phase: " + std::string(s));
}

Json to_json(const Source& s) { return {{"key", s.key}, {"reference", s.reference}}; }

Source source_from_json(const Json& j) {
  return {j.at("key").get<std::string>(), j.at("reference").get<std::string>()};
}

Json sources_to_json(const std::vector<Source>& v) {
  Json a = Json::array();
  for (const auto& s : v) a.push_back(to_json(s));
  return a;
}

std::vector<Source> sources_from_json(const Json& j) {
  std::vector<Source> out;
  for (const auto& s : j) out.push_back(source_from_json(s));
  return out;
}

}  // namespace

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::kReportDelivered: return "report_delivered";
    case Termination::kTurnBudget: return "turn_budget";
    case Termination::kTokenBudget: return "token_budget";
    case Termination::kToolBudget: return "tool_budget";
    case Termination::kError: return "error";
  }
  return "error";
}

std::optional<Termination> parse_termination(std::string_view s) {
  for (auto t : {Termination::kReportDelivered, Termination::kTurnBudget, Termination::kTokenBudget,
                 Termination::kToolBudget, Termination::kError}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

Json to_json(const ToolCall& c) { return {{"name", c.name}, {"arguments", c.arguments}}; }

Json to_json(const TurnAction& a) {
  Json j;
  j["kind"] = a.kind == TurnAction::Kind::kToolCalls ? "tool_calls" : "final_report";
  j["calls"] = Json::array();
  for (const auto& c : a.calls) j["calls"].push_back(to_json(c));
  if (a.kind == TurnAction::Kind::kFinalReport) j["report_text"] = a.report_text;
  j["reasoning"] = a.reasoning;
  j["token_count"] = a.token_count;
  return j;
}

Json to_json(const Trajectory& t) {
  Json j;
  j["episode_id"] = t.episode_id;
  j["query"] = t.query;
  j["clock_now"] = format_rfc3339(t.clock_now);
  j["termination"] = std::string(to_string(t.termination));
  j["termination_detail"] = t.termination_detail;
  j["final_report"] = t.final_report ? Json(*t.final_report) : Json(nullptr);
  j["citations"] = sources_to_json(t.citations);
  j["dangling_citations"] = t.dangling_citations;
  j["tokens_spent"] = t.tokens_spent;
  j["tool_calls_made"] = t.tool_calls_made;
  auto& steps = j["steps"] = Json::array();
  for (const auto& s : t.steps) {
    Json js;
    js["state"] = {{"turn", s.state.turn_index + 1},
                   {"tokens_spent", s.state.tokens_spent},
                   {"tool_calls_made", s.state.tool_calls_made},
                   {"phase", std::string(to_string(s.state.phase))}};
    js["output"] = s.output;
    js["action"] = s.action ? to_json(*s.action) : Json(nullptr);
    js["parse_error"] = s.parse_error ? Json(*s.parse_error) : Json(nullptr);
    js["truncated"] = s.truncated;
    js["attempts"] = s.attempts;
    auto& obs = js["observations"] = Json::array();
    for (const auto& o : s.observations) {
      obs.push_back({{"tool_name", o.tool_name},
                     {"content", o.content},
                     {"is_error", o.is_error},
                     {"offloaded", o.offloaded},
                     {"sources", sources_to_json(o.sources)}});
    }
    steps.push_back(std::move(js));
  }
  return j;
}

Trajectory trajectory_from_json(const Json& j) {
  try {
    Trajectory t;
    t.episode_id = j.at("episode_id").get<std::string>();
    t.query = j.at("query").get<std::string>();
    t.clock_now = parse_rfc3339(j.at("clock_now").get<std::string>());
    const auto term = parse_termination(j.at("termination").get<std::string>());
    if (!term) throw Error(ErrorCode::kParse, "unknown termination");
    t.termination = *term;
    t.termination_detail = j.value("termination_detail", std::string{});
    if (!j.at("final_report").is_null()) t.final_report = j.at("final_report").get<std::string>();
    t.citations = sources_from_json(j.at("citations"));
    t.dangling_citations = j.value("dangling_citations", std::vector<std::string>{});
    t.tokens_spent = j.at("tokens_spent").get<std::size_t>();
    t.tool_calls_made = j.at("tool_calls_made").get<std::size_t>();
    for (const auto& js : j.at("steps")) {
      Step s;
      const auto& st = js.at("state");
      s.state.turn_index = st.at("turn").get<std::size_t>() - 1;
      s.state.tokens_spent = st.at("tokens_spent").get<std::size_t>();
      s.state.tool_calls_made = st.at("tool_calls_made").get<std::size_t>();
      s.state.phase = parse_phase(st.at("phase").get<std::string>());
      s.output = js.at("output").get<std::string>();
      if (!js.at("action").is_null()) {
        const auto& ja = js.at("action");
        TurnAction a;
        a.kind = ja.at("kind").get<std::string>() == "tool_calls" ? TurnAction::Kind::kToolCalls
                                                                  : TurnAction::Kind::kFinalReport;
        for (const auto& c : ja.at("calls")) {
          a.calls.push_back({c.at("name").get<std::string>(), c.at("arguments")});
        }
        a.report_text = ja.value("report_text", std::string{});
        a.reasoning = ja.value("reasoning", std::string{});
        a.token_count = ja.value("token_count", std::size_t{0});
        s.action = std::move(a);
      }
      if (!js.at("parse_error").is_null()) s.parse_error = js.at("parse_error").get<std::string>();
      s.truncated = js.value("truncated", false);
      s.attempts = js.value("attempts", std::size_t{1});
      for (const auto& o : js.at("observations")) {
        s.observations.push_back({o.at("tool_name").get<std::string>(),
                                  o.at("content").get<std::string>(), o.value("is_error", false),
                                  o.value("offloaded", false), sources_from_json(o.at("sources"))});
      }
      t.steps.push_back(std::move(s));
    }
    return t;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed trajectory: ") + e.what());
  }
}

std::vector<ToolCall> all_tool_calls(const Trajectory& t) {
  std::vector<ToolCall> out;
  for (const auto& s : t.steps) {
    if (!s.action) continue;
    for (const auto& c : s.action->calls) out.push_back(c);
  }
  return out;
}

}  // namespace dr::agent
