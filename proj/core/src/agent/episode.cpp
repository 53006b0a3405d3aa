#include "dr/agent/episode.hpp"

#include <future>
#include <thread>

#include <fmt/format.h>

#include "dr/agent/budget.hpp"
#include "dr/agent/citations.hpp"
#include "dr/agent/turn_parser.hpp"
#include "dr/error.hpp"
#include "dr/text.hpp"

namespace dr::agent {

namespace {

std::string derive_episode_id(const std::string& query, Timestamp now) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  };
  mix(query);
  mix(format_rfc3339(now));
  return fmt::format("ep-{:016x}", h);
}

StateSnapshot snapshot(const AgentState& s) {
  return {s.turn_index, s.tokens_spent, s.tool_calls_made, s.phase};
}

std::string render_observation(const Observation& o) {
  return fmt::format("<tool_response name=\"{}\"{}>\n{}\n</tool_response>", o.tool_name,
                     o.is_error ? " error=\"true\"" : "", o.content);
}

ToolResult invoke_tool(ToolRegistry& tools, const ToolCall& call) {
  Tool* tool = tools.find(call.name);
  if (!tool) return {"unknown tool: " + call.name, true, false, {}};
  try {
    return tool->invoke(call.arguments);
  } catch (const std::exception& e) {
    return {std::string("tool failed: ") + e.what(), true, false, {}};
  }
}

}  // namespace

std::string default_system_prompt(const std::string& now, const ToolRegistry& tools) {
  std::string prompt = fmt::format(
      "You are a deep-research agent. The current date and time is {}.\n"
      "Work in turns: reason, then either call tools or deliver the final report.\n"
      "To call a tool, emit one block per call:\n"
      "<tool_call>{{\"name\": \"<tool>\", \"arguments\": {{...}}}}</tool_call>\n"
      "A turn with no tool-call block is treated as the final report. Cite sources in the "
      "report with \\cite{{key}} using the keys returned by tools.\n"
      "Available tools:",
      now);
  for (const auto& name : tools.names()) {
    prompt += "\n- " + name;
    if (auto* t = tools.find(name); t && !t->description().empty()) {
      prompt += ": " + t->description();
    }
  }
  return prompt;
}

Trajectory run_episode(const std::string& query, const EpisodeConfig& config, ModelClient& policy,
                       ToolRegistry& tools, const EpisodeHooks& hooks) {
  config.validate();
  if (text::trim(query).empty()) throw Error(ErrorCode::kInvalidArgument, "query is empty");

  Trajectory traj;
  traj.query = query;
  traj.clock_now = config.clock_now;
  traj.episode_id =
      config.episode_id.empty() ? derive_episode_id(query, config.clock_now) : config.episode_id;

  const std::string now = format_rfc3339(config.clock_now);
  AgentState state;
  state.message_history.push_back(
      {"system", hooks.system_prompt ? hooks.system_prompt(now, tools) : default_system_prompt(now, tools)});
  state.message_history.push_back({"user", query});

  std::vector<Source> known_sources;
  auto sleep = hooks.sleep ? hooks.sleep : [](std::chrono::milliseconds d) {
    if (d.count() > 0) std::this_thread::sleep_for(d);
  };

  auto finish = [&](Termination t, std::string detail) {
    traj.termination = t;
    traj.termination_detail = std::move(detail);
    traj.tokens_spent = state.tokens_spent;
    traj.tool_calls_made = state.tool_calls_made;
    return traj;
  };

  while (true) {
    state.phase = state.turn_index == 0 ? Phase::kPlanningReflection : Phase::kFeedbackValidation;
    {
      const TurnAction idle;
      if (!enforce_budget(state, idle, config).allow) {
        return finish(Termination::kTurnBudget,
                      fmt::format("reached the limit of {} turns", config.max_turns));
      }
    }

    ModelRequest request{state.message_history, config.max_tokens_per_turn, 0.0};
    ModelResponse response;
    std::size_t attempts = 0;
    std::string transport_error;
    auto backoff = config.retry_backoff;
    while (true) {
      ++attempts;
      try {
        response = policy.complete(request);
        transport_error.clear();
        break;
      } catch (const Error& e) {
        transport_error = e.what();
        if (e.code() != ErrorCode::kTransport || attempts > config.transport_retries) break;
      } catch (const std::exception& e) {
        transport_error = e.what();
        break;
      }
      sleep(backoff);
      backoff *= 2;
    }
    if (!transport_error.empty()) {
      return finish(Termination::kError,
                    fmt::format("policy failed after {} attempt(s): {}", attempts, transport_error));
    }

    Step step;
    step.state = snapshot(state);
    step.attempts = attempts;
    std::size_t tokens = response.completion_tokens.value_or(text::approx_tokens(response.text));
    std::string output = std::move(response.text);
    if (tokens > config.max_tokens_per_turn) {
      output = std::string(text::utf8_prefix(output, config.max_tokens_per_turn * 4));
      tokens = config.max_tokens_per_turn;
      step.truncated = true;
    }
    step.output = output;

    std::optional<TurnAction> action;
    try {
      action = parse_model_turn(output);
    } catch (const ParseError& e) {
      step.parse_error = fmt::format("{} at bytes [{}, {})", e.what(), e.begin(), e.end());
    }

    TurnAction proposed = action ? *action : TurnAction{TurnAction::Kind::kToolCalls, {}, {}, {}, 0};
    proposed.token_count = tokens;
    const auto decision = enforce_budget(state, proposed, config);
    if (!decision.allow) {
      std::string detail;
      if (decision.reason == Termination::kTokenBudget) {
        detail = fmt::format("turn {} needs {} tokens with {} of {} spent", state.turn_index + 1,
                             tokens, state.tokens_spent, config.total_token_budget);
      } else {
        detail = fmt::format("turn {} proposes {} tool call(s) with {} of {} used",
                             state.turn_index + 1, proposed.calls.size(), state.tool_calls_made,
                             config.tool_call_budget);
      }
      return finish(decision.reason, std::move(detail));
    }

    state.tokens_spent += tokens;
    state.message_history.push_back({"assistant", output});

    if (!action) {
      state.message_history.push_back(
          {"user", "Your last turn contained a malformed tool call (" + *step.parse_error +
                       "). Re-issue the call with valid syntax."});
      traj.steps.push_back(std::move(step));
      ++state.turn_index;
      continue;
    }

    action->token_count = tokens;
    step.action = action;

    if (action->kind == TurnAction::Kind::kFinalReport) {
      traj.steps.push_back(std::move(step));
      ++state.turn_index;
      const auto report = validate_report_citations(action->report_text, known_sources);
      for (const auto& key : report.cited) {
        for (const auto& s : known_sources) {
          if (s.key == key) {
            traj.citations.push_back(s);
            break;
          }
        }
      }
      traj.dangling_citations = report.dangling;
      traj.final_report = action->report_text;
      return finish(Termination::kReportDelivered, {});
    }

    state.phase = Phase::kToolExecution;
    std::vector<ToolResult> results(action->calls.size());
    if (config.parallel_tool_calls && action->calls.size() > 1) {
      std::vector<std::future<ToolResult>> pending;
      pending.reserve(action->calls.size());
      for (const auto& call : action->calls) {
        pending.push_back(std::async(std::launch::async, [&tools, &call] { return invoke_tool(tools, call); }));
      }
      for (std::size_t i = 0; i < pending.size(); ++i) results[i] = pending[i].get();
    } else {
      for (std::size_t i = 0; i < action->calls.size(); ++i) {
        results[i] = invoke_tool(tools, action->calls[i]);
      }
    }
    state.tool_calls_made += action->calls.size();

    for (std::size_t i = 0; i < results.size(); ++i) {
      ToolResult r = std::move(results[i]);
      if (hooks.post_process) {
        try {
          r = hooks.post_process(std::move(r), action->calls[i]);
        } catch (const std::exception& e) {
          r = {std::string("tool output handling failed: ") + e.what(), true, false, {}};
        }
      }
      Observation obs{action->calls[i].name, std::move(r.content), r.is_error, r.offloaded,
                      std::move(r.sources)};
      for (const auto& s : obs.sources) {
        bool dup = false;
        for (const auto& k : known_sources) dup = dup || k.key == s.key;
        if (!dup) known_sources.push_back(s);
      }
      state.message_history.push_back({"user", render_observation(obs)});
      step.observations.push_back(std::move(obs));
    }
    state.phase = Phase::kFeedbackValidation;
    traj.steps.push_back(std::move(step));
    ++state.turn_index;
  }
}

}  // namespace dr::agent
