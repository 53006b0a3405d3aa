#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dr/model.hpp"
#include "dr/time.hpp"

namespace dr::agent {

using Json = nlohmann::json;

struct EpisodeConfig {
  std::size_t max_turns = 30;
  std::size_t max_tokens_per_turn = 16384;
  std::size_t tool_call_budget = 200;
  std::size_t total_token_budget = 30 * 16384;
  // What the policy is told "now" is; the host clock is never consulted.
  Timestamp clock_now{};
  std::size_t transport_retries = 2;
  std::chrono::milliseconds retry_backoff{500};
  bool parallel_tool_calls = true;
  std::string episode_id;

  /// Throws dr::Error(kInvalidArgument) when a budget is zero.
  void validate() const;
};

enum class Phase { kPlanningReflection, kToolExecution, kFeedbackValidation };

struct AgentState {
  std::size_t turn_index = 0;  // 0-based
  std::vector<Message> message_history;
  std::size_t tokens_spent = 0;
  std::size_t tool_calls_made = 0;
  Phase phase = Phase::kPlanningReflection;
};

struct ToolCall {
  std::string name;
  Json arguments = Json::object();
};

struct TurnAction {
  enum class Kind { kToolCalls, kFinalReport };

  Kind kind = Kind::kFinalReport;
  std::vector<ToolCall> calls;   // nonempty iff kind == kToolCalls
  std::string report_text;       // set iff kind == kFinalReport
  std::string reasoning;         // prose emitted alongside tool calls
  std::size_t token_count = 0;   // output tokens charged for this turn
};

/// A citable source surfaced by a tool observation.
struct Source {
  std::string key;
  std::string reference;

  bool operator==(const Source&) const = default;
};

struct Observation {
  std::string tool_name;
  std::string content;
  bool is_error = false;
  bool offloaded = false;
  std::vector<Source> sources;
};

struct StateSnapshot {
  std::size_t turn_index = 0;
  std::size_t tokens_spent = 0;
  std::size_t tool_calls_made = 0;
  Phase phase = Phase::kPlanningReflection;
};

struct Step {
  StateSnapshot state;
  std::string output;                  // policy text after truncation
  std::optional<TurnAction> action;    // empty when the turn failed to parse
  std::optional<std::string> parse_error;
  std::vector<Observation> observations;  // one per call, in call order
  bool truncated = false;
  std::size_t attempts = 1;            // policy calls including transport retries
};

enum class Termination { kReportDelivered, kTurnBudget, kTokenBudget, kToolBudget, kError };

struct CitationReport {
  std::size_t resolved = 0;
  std::vector<std::string> dangling;
  std::vector<std::string> cited;  // distinct keys in first-appearance order
};

struct Trajectory {
  std::string episode_id;
  std::string query;
  Timestamp clock_now{};
  std::vector<Step> steps;
  std::optional<std::string> final_report;
  Termination termination = Termination::kError;
  std::string termination_detail;
  std::vector<Source> citations;
  std::vector<std::string> dangling_citations;
  std::size_t tokens_spent = 0;
  std::size_t tool_calls_made = 0;

  std::size_t total_tool_calls() const;
  std::size_t total_observations() const;
};

std::string_view to_string(Phase p);
std::string_view to_string(Termination t);
std::optional<Termination> parse_termination(std::string_view s);

Json to_json(const ToolCall& c);
Json to_json(const TurnAction& a);
Json to_json(const Trajectory& t);
/// Inverse of to_json; throws dr::Error(kParse) on malformed input.
Trajectory trajectory_from_json(const Json& j);

/// Every tool call issued by the trajectory, in order.
std::vector<ToolCall> all_tool_calls(const Trajectory& t);

}  // namespace dr::agent
