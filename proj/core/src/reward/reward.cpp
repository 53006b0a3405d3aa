#include "dr/reward/reward.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "dr/error.hpp"

namespace dr::reward {

double ternary_score(Verdict v) {
  switch (v) {
    case Verdict::kNotSatisfied: return 0.0;
    case Verdict::kPartiallySatisfied: return 0.5;
    case Verdict::kFullySatisfied: return 1.0;
  }
  return 0.0;
}

int strict_map(Verdict v, RubricRole role) {
  if (is_positive(role)) return v == Verdict::kFullySatisfied ? 1 : 0;
  return v == Verdict::kNotSatisfied ? 0 : 1;
}

RubricJudgment make_judgment(Rubric rubric, Verdict verdict, std::string rationale) {
  const int b = strict_map(verdict, rubric.role);
  return {std::move(rubric), verdict, b, std::move(rationale)};
}

double aggregate_reward(const std::vector<RubricJudgment>& judgments) {
  double num = 0.0;
  double den = 0.0;
  for (const auto& j : judgments) {
    if (j.binary != strict_map(j.verdict, j.rubric.role)) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("rubric {}: binary {} disagrees with verdict {}", j.rubric.id, j.binary,
                              to_string(j.verdict)));
    }
    num += j.rubric.weight * j.binary;
    if (j.rubric.weight > 0) den += j.rubric.weight;
  }
  if (den <= 0.0) throw Error(ErrorCode::kNoPositiveRubric, "no rubric carries positive weight");
  return std::clamp(num / den, -1.0, 1.0);
}

double importance_ratio(double logp_new, double logp_old) { return std::exp(logp_new - logp_old); }

AdvantageTrace AdvantageTrace::with_terminal(std::vector<double> rewards, std::vector<double> values_per_step,
                                             double terminal_value, double gamma, double lambda) {
  values_per_step.push_back(terminal_value);
  return {std::move(rewards), std::move(values_per_step), gamma, lambda};
}

std::vector<double> td_residuals(const AdvantageTrace& trace) {
  if (trace.values.size() != trace.rewards.size() + 1) {
    throw Error(ErrorCode::kLengthMismatch,
                fmt::format("{} rewards need {} values, got {}", trace.rewards.size(), trace.rewards.size() + 1,
                            trace.values.size()));
  }
  std::vector<double> d(trace.rewards.size());
  for (std::size_t t = 0; t < d.size(); ++t) {
    d[t] = trace.rewards[t] + trace.gamma * trace.values[t + 1] - trace.values[t];
  }
  return d;
}

std::vector<double> gae_advantages(const AdvantageTrace& trace) {
  const auto delta = td_residuals(trace);
  std::vector<double> adv(delta.size());
  const double decay = trace.gamma * trace.lambda;
  double running = 0.0;
  for (std::size_t t = delta.size(); t-- > 0;) {
    running = delta[t] + decay * running;
    adv[t] = running;
  }
  return adv;
}

double ppo_clipped_objective(const std::vector<double>& ratios, const std::vector<double>& advantages,
                             double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(ErrorCode::kInvalidArgument, "epsilon must lie in (0, 1)");
  if (ratios.size() != advantages.size()) {
    throw Error(ErrorCode::kLengthMismatch, "ratios and advantages differ in length");
  }
  if (ratios.empty()) throw Error(ErrorCode::kInvalidArgument, "empty batch");
  double sum = 0.0;
  for (std::size_t t = 0; t < ratios.size(); ++t) {
    const double r = ratios[t];
    const double a = advantages[t];
    sum += std::min(r * a, std::clamp(r, 1.0 - epsilon, 1.0 + epsilon) * a);
  }
  return sum / static_cast<double>(ratios.size());
}

double ppo_clipped_objective(const PpoBatch& batch) {
  if (batch.logp_old.size() != batch.logp_new.size() || batch.logp_new.size() != batch.advantages.size()) {
    throw Error(ErrorCode::kLengthMismatch, "log-probabilities and advantages differ in length");
  }
  std::vector<double> ratios(batch.logp_new.size());
  for (std::size_t t = 0; t < ratios.size(); ++t) ratios[t] = importance_ratio(batch.logp_new[t], batch.logp_old[t]);
  return ppo_clipped_objective(ratios, batch.advantages, batch.epsilon);
}

Json to_json(const RubricJudgment& j) {
  return {{"rubric", dr::to_json(j.rubric)},
          {"verdict", to_string(j.verdict)},
          {"binary", j.binary},
          {"rationale", j.rationale}};
}

RubricJudgment judgment_from_json(const Json& j) {
  try {
    auto rubric = rubric_from_json(j.at("rubric"));
    const auto v = parse_verdict(j.at("verdict").get<std::string>());
    if (!v) throw Error(ErrorCode::kUnknownVerdict, "unknown verdict " + j.at("verdict").dump());
    return make_judgment(std::move(rubric), *v, j.value("rationale", std::string{}));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("judgment: ") + e.what());
  }
}

Json to_json(const AdvantageTrace& t) {
  return {{"rewards", t.rewards}, {"values", t.values}, {"gamma", t.gamma}, {"lambda", t.lambda}};
}

AdvantageTrace trace_from_json(const Json& j) {
  try {
    AdvantageTrace t;
    t.rewards = j.at("rewards").get<std::vector<double>>();
    t.values = j.at("values").get<std::vector<double>>();
    t.gamma = j.value("gamma", 1.0);
    t.lambda = j.value("lambda", 1.0);
    if (t.values.size() == t.rewards.size()) t.values.push_back(j.value("terminal_value", 0.0));
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("advantage trace: ") + e.what());
  }
}

}  // namespace dr::reward
