#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dr/jsonl.hpp"
#include "dr/model.hpp"
#include "dr/rubric.hpp"

namespace dr::synth {

struct RubricViolation {
  std::size_t index = 0;  // position in the candidate list
  std::string reason;
};

/// Mechanical checks: one-sentence criterion, no duplicate criterion text,
/// nonzero finite weight whose sign matches the role.
std::vector<RubricViolation> rubric_structure_violations(const std::vector<Rubric>& rubrics);

struct RubricSynthesis {
  std::string hidden_summary;
  std::vector<Rubric> rubrics;
  std::vector<std::string> rejected;  // "<criterion>: <reason>"
  std::size_t attempts = 0;
};

/// Drafts a hidden task summary and rubrics from seed examples. A draft with
/// violations is regenerated once; violating rubrics of the second draft are
/// dropped. Throws dr::Error(kRubricRejected) when nothing usable remains.
RubricSynthesis synthesize_rubrics(const std::vector<std::string>& seeds, ModelClient& model);

enum class SampleStatus { kRetained, kDiscardedRoleMismatch, kDiscardedInconsistent, kDiscardedMalformed };
std::string to_string(SampleStatus s);

struct RoleAssessment {
  std::string rubric_id;
  RubricRole role = RubricRole::kExplicit;
  std::string attribution;
};

struct SynthSample {
  std::string hidden_summary;
  std::vector<Rubric> rubrics;
  std::string task_query;
  std::vector<RoleAssessment> reassessed_roles;  // aligned with rubrics when well formed
  SampleStatus status = SampleStatus::kRetained;
  std::string note;
  std::optional<double> consistency_score;
};

/// Writes the user-facing task from the summary, then has the model re-derive
/// every rubric's role from the task alone. One differing role discards the
/// sample; a missing or unreadable assessment marks it malformed.
SynthSample synthesize_task(const std::string& hidden_summary, const std::vector<Rubric>& rubrics,
                            ModelClient& model);

struct ConsistencyResult {
  double score = 0.0;
  bool keep = false;
  std::vector<std::string> contradictory;  // rubric ids
  bool malformed = false;
};

/// keep iff score >= threshold and no rubric is flagged contradictory.
ConsistencyResult consistency_check(const SynthSample& sample, ModelClient& judge, double threshold = 0.8);

/// Runs the consistency check on a retained sample and records the outcome.
void apply_consistency(SynthSample& sample, ModelClient& judge, double threshold = 0.8);

Json to_json(const SynthSample& s);

}  // namespace dr::synth
