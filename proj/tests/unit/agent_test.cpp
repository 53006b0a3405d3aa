#include <doctest.h>

#include "dr/agent/budget.hpp"
#include "dr/agent/citations.hpp"
#include "dr/agent/episode.hpp"
#include "dr/agent/turn_parser.hpp"
#include "dr/error.hpp"

using namespace dr;
using namespace dr::agent;

namespace {

std::shared_ptr<Tool> echo_tool(std::vector<Source> sources = {}) {
  return std::make_shared<FunctionTool>("echo", "echo the text", [sources](const Json& a) {
    return ToolResult{a.value("text", std::string{}), false, false, sources};
  });
}

std::string call(const std::string& text) {
  return format_tool_call({"echo", Json{{"text", text}}});
}

EpisodeConfig small_config() {
  EpisodeConfig c;
  c.max_turns = 5;
  c.max_tokens_per_turn = 100;
  c.total_token_budget = 400;
  c.tool_call_budget = 4;
  c.clock_now = parse_rfc3339("2025-01-01T00:00:00Z");
  c.retry_backoff = std::chrono::milliseconds(0);
  return c;
}

}  // namespace

TEST_SUITE("agent") {
  TEST_CASE("turn parser: tool calls and reasoning") {
    const auto a = parse_model_turn("thinking " + call("x") + " more " + call("y"));
    CHECK(a.kind == TurnAction::Kind::kToolCalls);
    REQUIRE(a.calls.size() == 2);
    CHECK(a.calls[1].arguments["text"] == "y");
    CHECK(a.reasoning == "thinking  more");
  }

  TEST_CASE("turn parser: plain text is a final report") {
    const auto a = parse_model_turn("Final answer \\cite{k}.");
    CHECK(a.kind == TurnAction::Kind::kFinalReport);
    CHECK(a.report_text == "Final answer \\cite{k}.");
  }

  TEST_CASE("turn parser: malformed blocks carry spans") {
    try {
      parse_model_turn("ab<tool_call>{not json}</tool_call>");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.begin() == 13);
      CHECK(e.end() == 23);
    }
    CHECK_THROWS_AS(parse_model_turn("<tool_call>{\"name\":\"x\"}"), ParseError);
    CHECK_THROWS_AS(parse_model_turn("x</tool_call>"), ParseError);
    CHECK_THROWS_AS(parse_model_turn("<tool_call>{\"arguments\":{}}</tool_call>"), ParseError);
  }

  TEST_CASE("budget checks in turn, token, tool order") {
    EpisodeConfig c = small_config();
    AgentState s;
    TurnAction a;
    a.token_count = 50;
    CHECK(enforce_budget(s, a, c).allow);
    s.turn_index = 5;
    CHECK(enforce_budget(s, a, c).reason == Termination::kTurnBudget);
    s.turn_index = 0;
    a.token_count = 101;
    CHECK(enforce_budget(s, a, c).reason == Termination::kTokenBudget);
    a.token_count = 10;
    s.tokens_spent = 395;
    CHECK(enforce_budget(s, a, c).reason == Termination::kTokenBudget);
    s.tokens_spent = 0;
    a.calls.resize(5);
    CHECK(enforce_budget(s, a, c).reason == Termination::kToolBudget);
  }

  TEST_CASE("citation keys and validation") {
    CHECK(extract_cite_keys("a \\cite{x, y} b \\cite{x}") == std::vector<std::string>{"x", "y"});
    const std::vector<Source> src{{"x", "doc x"}};
    const auto r = validate_report_citations("\\cite{x} and \\cite{z}", src);
    CHECK(r.resolved == 1);
    CHECK(r.dangling == std::vector<std::string>{"z"});
  }

  TEST_CASE("episode delivers a report with resolved citations") {
    ScriptedModelClient policy(std::vector<std::string>{call("hello"), "Report \\cite{s1}."});
    ToolRegistry tools;
    tools.add(echo_tool({{"s1", "source one"}}));
    const auto t = run_episode("q?", small_config(), policy, tools);
    CHECK(t.termination == Termination::kReportDelivered);
    REQUIRE(t.final_report.has_value());
    CHECK(t.steps.size() == 2);
    CHECK(t.citations.size() == 1);
    CHECK(t.dangling_citations.empty());
    CHECK(t.steps[0].observations[0].content == "hello");
    // The observation is fed back to the policy.
    const auto reqs = policy.requests();
    CHECK(reqs[1].messages.back().content.find("hello") != std::string::npos);
  }

  TEST_CASE("episode stops at the turn budget") {
    ScriptedModelClient policy([](const ModelRequest&, std::size_t) { return ModelResponse{call("again"), 5}; });
    ToolRegistry tools;
    tools.add(echo_tool());
    auto c = small_config();
    c.tool_call_budget = 100;
    const auto t = run_episode("q", c, policy, tools);
    CHECK(t.termination == Termination::kTurnBudget);
    CHECK(t.steps.size() == 5);
  }

  TEST_CASE("episode stops before exceeding the tool budget") {
    ScriptedModelClient policy(
        [](const ModelRequest&, std::size_t) { return ModelResponse{call("a") + call("b") + call("c"), 5}; });
    ToolRegistry tools;
    tools.add(echo_tool());
    const auto t = run_episode("q", small_config(), policy, tools);
    CHECK(t.termination == Termination::kToolBudget);
    CHECK(t.tool_calls_made == 3);
  }

  TEST_CASE("malformed turns are recorded and fed back") {
    ScriptedModelClient policy(std::vector<std::string>{"<tool_call>{oops}</tool_call>", "done"});
    ToolRegistry tools;
    tools.add(echo_tool());
    const auto t = run_episode("q", small_config(), policy, tools);
    CHECK(t.termination == Termination::kReportDelivered);
    REQUIRE(t.steps.size() == 2);
    CHECK(t.steps[0].parse_error.has_value());
    CHECK_FALSE(t.steps[0].action.has_value());
  }

  TEST_CASE("transport failures are retried then end the episode") {
    std::size_t n = 0;
    ScriptedModelClient flaky([&n](const ModelRequest&, std::size_t) -> ModelResponse {
      if (n++ < 2) throw Error(ErrorCode::kTransport, "reset");
      return {"ok", 1};
    });
    ToolRegistry tools;
    auto t = run_episode("q", small_config(), flaky, tools);
    CHECK(t.termination == Termination::kReportDelivered);
    CHECK(t.steps[0].attempts == 3);

    ScriptedModelClient dead([](const ModelRequest&, std::size_t) -> ModelResponse {
      throw Error(ErrorCode::kTransport, "down");
    });
    t = run_episode("q", small_config(), dead, tools);
    CHECK(t.termination == Termination::kError);
  }

  TEST_CASE("unknown tools become error observations") {
    ScriptedModelClient policy(
        std::vector<std::string>{format_tool_call({"nope", Json::object()}), "done"});
    ToolRegistry tools;
    const auto t = run_episode("q", small_config(), policy, tools);
    CHECK(t.steps[0].observations[0].is_error);
  }

  TEST_CASE("trajectory json round-trip") {
    ScriptedModelClient policy(std::vector<std::string>{call("hello"), "Report \\cite{s1}."});
    ToolRegistry tools;
    tools.add(echo_tool({{"s1", "source one"}}));
    const auto t = run_episode("q?", small_config(), policy, tools);
    const auto j = to_json(t);
    const auto back = trajectory_from_json(j);
    CHECK(to_json(back) == j);
    CHECK(all_tool_calls(back).size() == 1);
  }

  TEST_CASE("invalid configs and empty queries throw") {
    ScriptedModelClient policy(std::vector<std::string>{"x"});
    ToolRegistry tools;
    auto c = small_config();
    CHECK_THROWS_AS(run_episode("  ", c, policy, tools), Error);
    c.max_turns = 0;
    CHECK_THROWS_AS(run_episode("q", c, policy, tools), Error);
  }
}
