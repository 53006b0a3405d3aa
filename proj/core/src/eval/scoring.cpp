#include "dr/eval/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "dr/error.hpp"

namespace dr::eval {

double weighted_report_score(const std::vector<WeightedEnsemble>& items) {
  double pos = 0.0;
  double neg = 0.0;
  double denom = 0.0;
  for (const auto& it : items) {
    if (!it.ensemble.evaluable) continue;
    const double w = std::abs(it.weight);
    if (is_positive(it.role)) {
      pos += w * it.ensemble.mean;
      denom += w;
    } else {
      neg += w * it.ensemble.mean;
    }
  }
  if (denom <= 0.0) throw Error(ErrorCode::kNoPositiveRubric, "no evaluable positive rubric");
  return 100.0 * std::max(0.0, pos - neg) / denom;
}

int ensemble_binary(const EnsembleScore& e, RubricRole role) {
  if (!e.evaluable) return 0;
  if (is_positive(role)) return e.mean >= 1.0 ? 1 : 0;
  return e.mean > 0.0 ? 1 : 0;
}

double zero_score_override(double score, const std::vector<RubricOutcome>& outcomes,
                           const std::set<std::string>& fatal_rubric_ids) {
  for (const auto& o : outcomes) {
    if (o.role == RubricRole::kNegative && o.binary == 1 && fatal_rubric_ids.count(o.rubric_id)) return 0.0;
  }
  return score;
}

TierBoundaries::TierBoundaries(std::vector<Tier> tiers) : tiers_(std::move(tiers)) {
  if (tiers_.empty()) throw Error(ErrorCode::kInvalidArgument, "no tiers");
  std::sort(tiers_.begin(), tiers_.end(), [](const Tier& a, const Tier& b) { return a.lower < b.lower; });
  for (std::size_t i = 0; i < tiers_.size(); ++i) {
    if (!(tiers_[i].lower < tiers_[i].upper)) {
      throw Error(ErrorCode::kInvalidArgument, "tier " + tiers_[i].name + " is empty");
    }
    if (i > 0 && tiers_[i].lower != tiers_[i - 1].upper) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("tiers {} and {} are not contiguous", tiers_[i - 1].name, tiers_[i].name));
    }
  }
}

TierBoundaries default_tiers() {
  return TierBoundaries({{"Tier 3", 0, 15}, {"Tier 2", 15, 25}, {"Tier 1", 25, 35}});
}

std::string tier_assign(double score, const TierBoundaries& boundaries) {
  const auto& t = boundaries.tiers();
  for (std::size_t i = 0; i < t.size(); ++i) {
    const bool top = i + 1 == t.size();
    if (score >= t[i].lower && (score < t[i].upper || (top && score == t[i].upper))) return t[i].name;
  }
  throw Error(ErrorCode::kOutOfRange,
              fmt::format("score {} is outside [{}, {}]", score, t.front().lower, t.back().upper));
}

ReportScore score_report(const std::vector<Rubric>& rubrics, const std::vector<EnsembleScore>& ensembles) {
  std::map<std::string, const EnsembleScore*> by_id;
  for (const auto& e : ensembles) by_id[e.rubric_id] = &e;
  std::vector<WeightedEnsemble> items;
  std::vector<RubricOutcome> outcomes;
  std::set<std::string> fatal;
  ReportScore r;
  for (const auto& rb : rubrics) {
    auto it = by_id.find(rb.id);
    if (it == by_id.end()) throw Error(ErrorCode::kNotFound, "no judgment for rubric " + rb.id);
    const auto& e = *it->second;
    if (!e.evaluable) r.unevaluable.push_back(rb.id);
    items.push_back({e, rb.weight, rb.role});
    outcomes.push_back({rb.id, rb.role, ensemble_binary(e, rb.role)});
    if (rb.fatal) fatal.insert(rb.id);
  }
  r.raw = weighted_report_score(items);
  r.score = zero_score_override(r.raw, outcomes, fatal);
  r.fatal_triggered = r.score != r.raw;
  return r;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string score_csv(const std::vector<ScoreRow>& rows) {
  std::string out = "system,category,weighted_score\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{:.4f}\n", csv_field(r.system), csv_field(r.category), r.score);
  }
  return out;
}

}  // namespace dr::eval
