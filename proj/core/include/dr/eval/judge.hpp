#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dr/jsonl.hpp"
#include "dr/model.hpp"
#include "dr/rubric.hpp"

namespace dr::eval {

struct JudgeOptions {
  std::size_t trials = 3;
  std::size_t retries = 1;  // extra attempts for a malformed trial
  std::size_t max_tokens = 2048;
};

struct EnsembleScore {
  std::string rubric_id;
  std::vector<std::optional<double>> trial_scores;  // nullopt: invalid trial
  double mean = 0.0;                                // over valid trials
  bool evaluable = true;
  std::vector<std::string> raw_replies;

  std::size_t invalid_trials() const;
};

/// Satisfaction prompt for explicit/implicit rubrics, flaw-detection prompt
/// (score = how strongly the flaw is present) for negative ones.
std::vector<Message> judge_messages(const std::string& report, const Rubric& rubric);

/// Reads {"verdict": label} or {"score": 0|0.5|1} from a reply, falling back
/// to a bare label. nullopt when nothing valid is found.
std::optional<double> parse_judge_reply(const std::string& reply);

/// Runs the trials at temperature 0. A malformed trial is retried, then
/// recorded invalid; two or more invalid trials make the rubric unevaluable.
EnsembleScore judge_rubric_ensemble(const std::string& report, const Rubric& rubric, ModelClient& judge,
                                    const JudgeOptions& options = {});

/// One ensemble per rubric, in rubric order.
std::vector<EnsembleScore> judge_report(const std::string& report, const std::vector<Rubric>& rubrics,
                                        ModelClient& judge, const JudgeOptions& options = {},
                                        std::size_t jobs = 1);

Json to_json(const EnsembleScore& e);
EnsembleScore ensemble_from_json(const Json& j);

}  // namespace dr::eval
