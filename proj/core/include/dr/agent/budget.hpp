#pragma once

#include "dr/agent/trajectory.hpp"

namespace dr::agent {

struct BudgetDecision {
  bool allow = true;
  Termination reason = Termination::kTurnBudget;  // meaningful when !allow

  static BudgetDecision allowed() { return {}; }
  static BudgetDecision terminate(Termination r) { return {false, r}; }
};

/// Pure check: terminates exactly when executing `proposed` would exceed the
/// turn, token or tool-call budget. Checked in that order.
BudgetDecision enforce_budget(const AgentState& state, const TurnAction& proposed,
                              const EpisodeConfig& config);

}  // namespace dr::agent
