#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dr/jsonl.hpp"
#include "dr/rubric.hpp"

namespace dr::reward {

/// 0, 0.5 or 1.
double ternary_score(Verdict v);

/// Positive roles earn 1 only when fully satisfied; a negative rubric fires
/// (1) unless not satisfied at all.
int strict_map(Verdict v, RubricRole role);

struct RubricJudgment {
  Rubric rubric;
  Verdict verdict = Verdict::kNotSatisfied;
  int binary = 0;
  std::string rationale;
};

RubricJudgment make_judgment(Rubric rubric, Verdict verdict, std::string rationale = {});

/// sum(w * b) / sum(w > 0), clamped to [-1, 1]. Throws
/// dr::Error(kNoPositiveRubric) when no weight is positive and
/// dr::Error(kInvalidArgument) when a binary disagrees with its verdict.
double aggregate_reward(const std::vector<RubricJudgment>& judgments);

/// exp(logp_new - logp_old).
double importance_ratio(double logp_new, double logp_old);

struct AdvantageTrace {
  std::vector<double> rewards;  // r_0 .. r_{T-1}
  std::vector<double> values;   // V(s_0) .. V(s_T); the last entry bootstraps
  double gamma = 1.0;
  double lambda = 1.0;

  /// values_per_step has one entry per reward; the terminal value is appended.
  static AdvantageTrace with_terminal(std::vector<double> rewards, std::vector<double> values_per_step,
                                      double terminal_value = 0.0, double gamma = 1.0, double lambda = 1.0);
};

/// delta_t = r_t + gamma * V(s_{t+1}) - V(s_t). Throws dr::Error(kLengthMismatch).
std::vector<double> td_residuals(const AdvantageTrace& trace);

/// A_t = sum_l (gamma * lambda)^l * delta_{t+l}, evaluated backwards.
std::vector<double> gae_advantages(const AdvantageTrace& trace);

struct PpoBatch {
  std::vector<double> logp_old;
  std::vector<double> logp_new;
  std::vector<double> advantages;
  double epsilon = 0.2;
};

/// Mean over steps of min(r_t * A_t, clip(r_t, 1 - eps, 1 + eps) * A_t).
double ppo_clipped_objective(const PpoBatch& batch);

/// Same objective from precomputed ratios.
double ppo_clipped_objective(const std::vector<double>& ratios, const std::vector<double>& advantages,
                             double epsilon);

Json to_json(const RubricJudgment& j);
RubricJudgment judgment_from_json(const Json& j);
Json to_json(const AdvantageTrace& t);
AdvantageTrace trace_from_json(const Json& j);

}  // namespace dr::reward
