#pragma once

#include <set>
#include <string>
#include <vector>

#include "dr/eval/judge.hpp"
#include "dr/rubric.hpp"

namespace dr::eval {

struct WeightedEnsemble {
  EnsembleScore ensemble;
  double weight = 1.0;  // sign ignored; role decides the side
  RubricRole role = RubricRole::kExplicit;
};

/// 100 * max(0, sum_pos w*m - sum_neg |w|*m) / sum_pos w over evaluable
/// rubrics. Throws dr::Error(kNoPositiveRubric).
double weighted_report_score(const std::vector<WeightedEnsemble>& items);

/// Positive rubrics count as met only when every trial is fully satisfied;
/// a negative rubric triggers when any trial sees the flaw.
int ensemble_binary(const EnsembleScore& e, RubricRole role);

struct RubricOutcome {
  std::string rubric_id;
  RubricRole role = RubricRole::kNegative;
  int binary = 0;
};

/// 0 when a fatal negative rubric fired, otherwise `score`.
double zero_score_override(double score, const std::vector<RubricOutcome>& outcomes,
                           const std::set<std::string>& fatal_rubric_ids);

struct Tier {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
};

/// Ascending, contiguous tiers: [lower, upper) each, the topmost closed.
class TierBoundaries {
 public:
  explicit TierBoundaries(std::vector<Tier> tiers);
  const std::vector<Tier>& tiers() const { return tiers_; }

 private:
  std::vector<Tier> tiers_;
};

/// Tier 3 [0, 15), Tier 2 [15, 25), Tier 1 [25, 35].
TierBoundaries default_tiers();

/// Throws dr::Error(kOutOfRange) outside the covered range.
std::string tier_assign(double score, const TierBoundaries& boundaries);

struct ReportScore {
  double raw = 0.0;
  double score = 0.0;  // after the fatal override
  bool fatal_triggered = false;
  std::vector<std::string> unevaluable;
};

/// Weighted score plus the fatal override for one judged report.
ReportScore score_report(const std::vector<Rubric>& rubrics, const std::vector<EnsembleScore>& ensembles);

struct ScoreRow {
  std::string system;
  std::string category;
  double score = 0.0;
};

/// "system,category,weighted_score" with a header line; fields quoted when
/// needed.
std::string score_csv(const std::vector<ScoreRow>& rows);

/// RFC 4180 field quoting.
std::string csv_field(const std::string& s);

}  // namespace dr::eval
