#include "dr/eval/judge.hpp"

#include <cmath>

#include <fmt/format.h>

#include "dr/error.hpp"
#include "dr/parallel.hpp"
#include "dr/text.hpp"

namespace dr::eval {

namespace {

const char* const kPositiveSystem =
    "You grade research reports against a single rubric criterion. Decide how completely the "
    "report meets the criterion using only what the report actually contains.\n"
    "Scale:\n"
    "- not_satisfied (0): the criterion is unmet or handled incorrectly.\n"
    "- partially_satisfied (0.5): the criterion is addressed but with gaps or shallow coverage.\n"
    "- satisfied (1): the criterion is met fully and with adequate detail.\n"
    "Cite the passages you relied on in your reasoning.\n"
    "Reply with JSON {\"reasoning\": str, \"verdict\": \"not_satisfied\"|\"partially_satisfied\"|"
    "\"satisfied\"}.";

const char* const kNegativeSystem =
    "You check research reports for one specific defect described by the criterion. The score "
    "measures how much of the defect the report shows, so a lower score means a better report.\n"
    "Scale:\n"
    "- not_satisfied (0): the defect does not appear.\n"
    "- partially_satisfied (0.5): the defect appears in a minor, isolated or inconsistent way.\n"
    "- satisfied (1): the defect is clear and pervasive.\n"
    "Quote the passages that show the defect, if any.\n"
    "Reply with JSON {\"reasoning\": str, \"verdict\": \"not_satisfied\"|\"partially_satisfied\"|"
    "\"satisfied\"}.";

std::optional<double> canonical(double s) {
  for (double c : {0.0, 0.5, 1.0}) {
    if (std::abs(s - c) < 1e-12) return c;
  }
  return std::nullopt;
}

std::optional<double> from_label(const std::string& label) {
  if (auto v = parse_verdict(label)) {
    switch (*v) {
      case Verdict::kNotSatisfied: return 0.0;
      case Verdict::kPartiallySatisfied: return 0.5;
      case Verdict::kFullySatisfied: return 1.0;
    }
  }
  return std::nullopt;
}

}  // namespace

std::size_t EnsembleScore::invalid_trials() const {
  std::size_t n = 0;
  for (const auto& t : trial_scores) n += t ? 0 : 1;
  return n;
}

std::vector<Message> judge_messages(const std::string& report, const Rubric& rubric) {
  const bool negative = rubric.role == RubricRole::kNegative;
  return {{"system", negative ? kNegativeSystem : kPositiveSystem},
          {"user", fmt::format("Criterion ({}): {}\n\nReport:\n{}", negative ? "defect" : "requirement",
                               rubric.criterion, report)}};
}

std::optional<double> parse_judge_reply(const std::string& reply) {
  if (auto j = extract_json(reply); j && j->is_object()) {
    if (auto v = j->find("verdict"); v != j->end() && v->is_string()) {
      if (auto s = from_label(v->get<std::string>())) return s;
    }
    if (auto s = j->find("score"); s != j->end() && s->is_number()) return canonical(s->get<double>());
    return std::nullopt;
  }
  const auto t = text::trim(reply);
  if (auto s = from_label(t)) return s;
  // A bare label on the last nonblank line.
  const auto lines = text::split_lines(t);
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
    auto line = text::trim(*it);
    if (line.empty()) continue;
    if (const auto colon = line.find(':'); colon != std::string::npos) line = text::trim(line.substr(colon + 1));
    while (!line.empty() && (line.back() == '.' || line.back() == '*')) line.pop_back();
    while (!line.empty() && line.front() == '*') line.erase(0, 1);
    return from_label(line);
  }
  return std::nullopt;
}

EnsembleScore judge_rubric_ensemble(const std::string& report, const Rubric& rubric, ModelClient& judge,
                                    const JudgeOptions& options) {
  if (options.trials == 0) throw Error(ErrorCode::kInvalidArgument, "trials must be positive");
  EnsembleScore e;
  e.rubric_id = rubric.id;
  const auto messages = judge_messages(report, rubric);
  for (std::size_t t = 0; t < options.trials; ++t) {
    std::optional<double> score;
    for (std::size_t attempt = 0; attempt <= options.retries && !score; ++attempt) {
      try {
        const auto reply = judge.complete({messages, options.max_tokens, 0.0}).text;
        e.raw_replies.push_back(reply);
        score = parse_judge_reply(reply);
      } catch (const Error& err) {
        e.raw_replies.push_back(std::string("error: ") + err.what());
      }
    }
    e.trial_scores.push_back(score);
  }
  double sum = 0.0;
  std::size_t valid = 0;
  for (const auto& s : e.trial_scores) {
    if (s) {
      sum += *s;
      ++valid;
    }
  }
  e.evaluable = e.invalid_trials() < 2 && valid > 0;
  e.mean = e.evaluable ? sum / static_cast<double>(valid) : 0.0;
  return e;
}

std::vector<EnsembleScore> judge_report(const std::string& report, const std::vector<Rubric>& rubrics,
                                        ModelClient& judge, const JudgeOptions& options, std::size_t jobs) {
  return parallel_map(rubrics.size(), jobs,
                      [&](std::size_t i) { return judge_rubric_ensemble(report, rubrics[i], judge, options); });
}

Json to_json(const EnsembleScore& e) {
  Json trials = Json::array();
  for (const auto& t : e.trial_scores) trials.push_back(t ? Json(*t) : Json(nullptr));
  return {{"rubric_id", e.rubric_id}, {"trial_scores", trials}, {"mean", e.mean}, {"evaluable", e.evaluable}};
}

EnsembleScore ensemble_from_json(const Json& j) {
  try {
    EnsembleScore e;
    e.rubric_id = j.at("rubric_id").get<std::string>();
    for (const auto& t : j.at("trial_scores")) {
      e.trial_scores.push_back(t.is_null() ? std::nullopt : std::optional<double>(t.get<double>()));
    }
    e.mean = j.at("mean").get<double>();
    e.evaluable = j.value("evaluable", true);
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kParse, std::string("ensemble score: ") + ex.what());
  }
}

}  // namespace dr::eval
