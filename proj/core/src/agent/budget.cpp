#include "dr/agent/budget.hpp"

namespace dr::agent {

BudgetDecision enforce_budget(const AgentState& state, const TurnAction& proposed,
                              const EpisodeConfig& config) {
  if (state.turn_index >= config.max_turns) {
    return BudgetDecision::terminate(Termination::kTurnBudget);
  }
  if (proposed.token_count > config.max_tokens_per_turn ||
      state.tokens_spent + proposed.token_count > config.total_token_budget) {
    return BudgetDecision::terminate(Termination::kTokenBudget);
  }
  if (state.tool_calls_made + proposed.calls.size() > config.tool_call_budget) {
    return BudgetDecision::terminate(Termination::kToolBudget);
  }
  return BudgetDecision::allowed();
}

}  // namespace dr::agent
