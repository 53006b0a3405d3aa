#include "dr/synth/rubric_synth.hpp"

#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

#include "dr/error.hpp"
#include "dr/text.hpp"

namespace dr::synth {

namespace {

bool ends_with_abbreviation(const std::string& piece) {
  static const std::vector<std::string> abbrev{"e.g.", "i.e.", "etc.", "vs.", "cf.", "approx.",
                                               "dr.",  "mr.",  "ms.",  "no.", "u.s.", "fig."};
  const auto t = text::fold_case(text::trim(piece));
  for (const auto& a : abbrev) {
    if (t.size() >= a.size() && t.compare(t.size() - a.size(), a.size(), a) == 0 &&
        (t.size() == a.size() || !text::is_word_char(static_cast<unsigned char>(t[t.size() - a.size() - 1])))) {
      return true;
    }
  }
  return false;
}

std::size_t sentence_count(const std::string& s) {
  std::size_t n = 0;
  bool open = false;
  for (const auto& piece : text::split_sentences(text::trim(s))) {
    if (text::trim(piece).empty()) continue;
    if (!open) ++n;
    open = ends_with_abbreviation(piece);
  }
  return n;
}

std::optional<std::pair<std::string, std::vector<Rubric>>> parse_draft(const std::string& reply,
                                                                        std::string& problem) {
  const auto j = extract_json(reply);
  if (!j || !j->is_object() || !(*j)["hidden_summary"].is_string() || !(*j)["rubrics"].is_array()) {
    problem = "reply must be JSON with hidden_summary and rubrics";
    return std::nullopt;
  }
  std::vector<Rubric> rubrics;
  std::size_t n = 0;
  for (auto item : (*j)["rubrics"]) {
    ++n;
    if (!item.is_object()) {
      problem = "rubric entries must be objects";
      return std::nullopt;
    }
    if (!item.contains("id")) item["id"] = fmt::format("r{}", n);
    try {
      rubrics.push_back(rubric_from_json(item));
    } catch (const Error& e) {
      problem = e.what();
      return std::nullopt;
    }
  }
  return std::make_pair((*j)["hidden_summary"].get<std::string>(), std::move(rubrics));
}

std::string draft_prompt(const std::vector<std::string>& seeds) {
  std::string p =
      "Study the example research requests below. First write a hidden summary of one new task "
      "that an expert report should satisfy, then derive rubrics for that report.\n"
      "Each rubric states one requirement in one sentence and has a role: explicit (asked for "
      "directly), implicit (expected by an expert although unstated) or negative (a mistake to "
      "penalize). Positive roles take weights > 0, negative roles weights < 0.\n"
      "Reply with JSON {\"hidden_summary\": str, \"rubrics\": [{\"id\": str, \"criterion\": str, "
      "\"weight\": number, \"role\": \"explicit\"|\"implicit\"|\"negative\", \"rationale\": str}]}.\n\n"
      "Examples:\n";
  for (const auto& s : seeds) p += "- " + text::collapse_whitespace(s) + "\n";
  return p;
}

}  // namespace

std::vector<RubricViolation> rubric_structure_violations(const std::vector<Rubric>& rubrics) {
  std::vector<RubricViolation> out;
  std::map<std::string, std::size_t> seen;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < rubrics.size(); ++i) {
    const auto& r = rubrics[i];
    const auto key = text::normalize_answer(r.criterion);
    if (key.empty()) {
      out.push_back({i, "criterion is empty"});
      continue;
    }
    if (sentence_count(r.criterion) != 1) out.push_back({i, "criterion is not a single sentence"});
    if (auto [it, fresh] = seen.emplace(key, i); !fresh) {
      out.push_back({i, fmt::format("criterion duplicates rubric {}", it->second + 1)});
    }
    if (!ids.insert(r.id).second) out.push_back({i, "duplicate rubric id " + r.id});
    if (!std::isfinite(r.weight) || r.weight == 0.0) {
      out.push_back({i, "weight must be finite and nonzero"});
    } else if ((r.role == RubricRole::kNegative) != (r.weight < 0.0)) {
      out.push_back({i, "weight sign disagrees with role"});
    }
  }
  return out;
}

RubricSynthesis synthesize_rubrics(const std::vector<std::string>& seeds, ModelClient& model) {
  if (seeds.empty()) throw Error(ErrorCode::kInvalidArgument, "no seed examples");
  RubricSynthesis out;
  std::vector<Message> messages{{"user", draft_prompt(seeds)}};
  for (std::size_t attempt = 1; attempt <= 2; ++attempt) {
    out.attempts = attempt;
    const auto reply = model.complete({messages, 8192, 0.0}).text;
    messages.push_back({"assistant", reply});
    std::string problem;
    auto draft = parse_draft(reply, problem);
    if (!draft) {
      if (attempt == 2) throw Error(ErrorCode::kRubricRejected, "unreadable rubric draft: " + problem);
      messages.push_back({"user", "Rejected: " + problem + ". Reply again with valid JSON."});
      continue;
    }
    const auto violations = rubric_structure_violations(draft->second);
    if (!violations.empty() && attempt == 1) {
      std::string fb = "Some rubrics break the rules:\n";
      for (const auto& v : violations) {
        fb += fmt::format("- rubric {}: {}\n", v.index + 1, v.reason);
      }
      messages.push_back({"user", fb + "Regenerate the full draft."});
      continue;
    }
    std::set<std::size_t> bad;
    for (const auto& v : violations) {
      bad.insert(v.index);
      out.rejected.push_back(draft->second[v.index].criterion + ": " + v.reason);
    }
    out.hidden_summary = text::trim(draft->first);
    for (std::size_t i = 0; i < draft->second.size(); ++i) {
      if (!bad.count(i)) out.rubrics.push_back(draft->second[i]);
    }
    if (out.rubrics.empty()) throw Error(ErrorCode::kRubricRejected, "every rubric failed the structural checks");
    if (out.hidden_summary.empty()) throw Error(ErrorCode::kRubricRejected, "hidden summary is empty");
    return out;
  }
  throw Error(ErrorCode::kRubricRejected, "no rubric draft produced");
}

std::string to_string(SampleStatus s) {
  switch (s) {
    case SampleStatus::kRetained: return "retained";
    case SampleStatus::kDiscardedRoleMismatch: return "discarded_role_mismatch";
    case SampleStatus::kDiscardedInconsistent: return "discarded_inconsistent";
    case SampleStatus::kDiscardedMalformed: return "discarded_malformed";
  }
  return "unknown";
}

SynthSample synthesize_task(const std::string& hidden_summary, const std::vector<Rubric>& rubrics,
                            ModelClient& model) {
  SynthSample s;
  s.hidden_summary = hidden_summary;
  s.rubrics = rubrics;
  std::string listing;
  for (const auto& r : rubrics) listing += fmt::format("- {}: {}\n", r.id, r.criterion);
  const auto prompt = fmt::format(
      "Hidden task summary:\n{}\n\nRubrics:\n{}\n"
      "1. Write the research request a user would send for this task.\n"
      "2. Looking only at that request, classify each rubric as explicit, implicit or negative "
      "and attribute the role to the request in a few words.\n"
      "Reply with JSON {{\"task_query\": str, \"reassessment\": [{{\"id\": str, \"role\": str, "
      "\"attribution\": str}}]}}.",
      hidden_summary, listing);
  const auto j = extract_json(model.complete({{{"user", prompt}}, 4096, 0.0}).text);
  auto malformed = [&](std::string why) {
    s.status = SampleStatus::kDiscardedMalformed;
    s.note = std::move(why);
    return s;
  };
  if (!j || !j->is_object() || !(*j)["task_query"].is_string() || !(*j)["reassessment"].is_array()) {
    return malformed("reply must be JSON with task_query and reassessment");
  }
  s.task_query = text::trim((*j)["task_query"].get<std::string>());
  if (s.task_query.empty()) return malformed("task_query is empty");

  std::map<std::string, RoleAssessment> by_id;
  for (const auto& a : (*j)["reassessment"]) {
    if (!a.is_object() || !a["id"].is_string() || !a["role"].is_string()) {
      return malformed("reassessment entries need id and role");
    }
    const auto role = parse_role(a["role"].get<std::string>());
    if (!role) return malformed("unknown role \"" + a["role"].get<std::string>() + "\"");
    by_id[a["id"].get<std::string>()] = {a["id"].get<std::string>(), *role,
                                         a.value("attribution", std::string{})};
  }
  for (const auto& r : rubrics) {
    auto it = by_id.find(r.id);
    if (it == by_id.end()) return malformed("no reassessment for rubric " + r.id);
    s.reassessed_roles.push_back(it->second);
  }
  for (std::size_t i = 0; i < rubrics.size(); ++i) {
    if (s.reassessed_roles[i].role != rubrics[i].role) {
      s.status = SampleStatus::kDiscardedRoleMismatch;
      s.note = fmt::format("rubric {} was {} and reassessed as {}", rubrics[i].id, to_string(rubrics[i].role),
                           to_string(s.reassessed_roles[i].role));
      return s;
    }
  }
  s.status = SampleStatus::kRetained;
  return s;
}

ConsistencyResult consistency_check(const SynthSample& sample, ModelClient& judge, double threshold) {
  std::string listing;
  for (const auto& r : sample.rubrics) {
    listing += fmt::format("- {} ({}): {}\n", r.id, to_string(r.role), r.criterion);
  }
  const auto prompt = fmt::format(
      "Hidden summary:\n{}\n\nTask:\n{}\n\nRubrics:\n{}\n"
      "Score from 0 to 1 how consistent the task is with the summary and how well the rubrics "
      "fit the task. List rubrics that contradict the task. Reply with JSON {{\"score\": number, "
      "\"contradictory\": [rubric ids]}}.",
      sample.hidden_summary, sample.task_query, listing);
  ConsistencyResult r;
  std::optional<Json> j;
  try {
    j = extract_json(judge.complete({{{"user", prompt}}, 1024, 0.0}).text);
  } catch (const Error&) {
    r.malformed = true;
    return r;
  }
  if (!j || !j->is_object() || !(*j)["score"].is_number()) {
    r.malformed = true;
    return r;
  }
  const double score = (*j)["score"].get<double>();
  if (!(score >= 0.0 && score <= 1.0)) {
    r.malformed = true;
    return r;
  }
  r.score = score;
  if (auto c = j->find("contradictory"); c != j->end()) {
    if (!c->is_array()) {
      r.malformed = true;
      return r;
    }
    for (const auto& id : *c) {
      if (id.is_string()) r.contradictory.push_back(id.get<std::string>());
    }
  }
  r.keep = score >= threshold && r.contradictory.empty();
  return r;
}

void apply_consistency(SynthSample& sample, ModelClient& judge, double threshold) {
  if (sample.status != SampleStatus::kRetained) return;
  const auto r = consistency_check(sample, judge, threshold);
  if (!r.malformed) sample.consistency_score = r.score;
  if (!r.keep) {
    sample.status = SampleStatus::kDiscardedInconsistent;
    sample.note = r.malformed ? "consistency judgment unreadable"
                              : fmt::format("consistency {:.3f} (threshold {:.2f}), {} contradictory", r.score,
                                            threshold, r.contradictory.size());
  }
}

Json to_json(const SynthSample& s) {
  Json rubrics = Json::array();
  for (const auto& r : s.rubrics) rubrics.push_back(to_json(r));
  Json roles = Json::array();
  for (const auto& a : s.reassessed_roles) {
    roles.push_back({{"id", a.rubric_id}, {"role", to_string(a.role)}, {"attribution", a.attribution}});
  }
  Json j{{"hidden_summary", s.hidden_summary},
         {"rubrics", rubrics},
         {"task_query", s.task_query},
         {"reassessed_roles", roles},
         {"status", to_string(s.status)}};
  if (!s.note.empty()) j["note"] = s.note;
  if (s.consistency_score) j["consistency_score"] = *s.consistency_score;
  return j;
}

}  // namespace dr::synth
