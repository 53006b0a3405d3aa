#include "dr/rubric.hpp"

#include "dr/error.hpp"
#include "dr/text.hpp"

namespace dr {

std::string_view to_string(RubricRole role) {
  switch (role) {
    case RubricRole::kExplicit: return "explicit";
    case RubricRole::kImplicit: return "implicit";
    case RubricRole::kNegative: return "negative";
  }
  return "explicit";
}

std::optional<RubricRole> parse_role(std::string_view s) {
  const auto f = text::fold_case(text::trim(s));
  if (f == "explicit") return RubricRole::kExplicit;
  if (f == "implicit") return RubricRole::kImplicit;
  if (f == "negative") return RubricRole::kNegative;
  return std::nullopt;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kNotSatisfied: return "not_satisfied";
    case Verdict::kPartiallySatisfied: return "partially_satisfied";
    case Verdict::kFullySatisfied: return "fully_satisfied";
  }
  return "not_satisfied";
}

std::optional<Verdict> parse_verdict(std::string_view s) {
  std::string f = text::collapse_whitespace(text::fold_case(s));
  for (auto& c : f) {
    if (c == '_' || c == '-') c = ' ';
  }
  if (f == "not satisfied" || f == "not") return Verdict::kNotSatisfied;
  if (f == "partially satisfied" || f == "partial" || f == "partially") {
    return Verdict::kPartiallySatisfied;
  }
  if (f == "fully satisfied" || f == "satisfied" || f == "full" || f == "fully") {
    return Verdict::kFullySatisfied;
  }
  return std::nullopt;
}

nlohmann::json to_json(const Rubric& r) {
  return {{"id", r.id},
          {"criterion", r.criterion},
          {"weight", r.weight},
          {"role", std::string(to_string(r.role))},
          {"rationale", r.rationale},
          {"fatal", r.fatal}};
}

Rubric rubric_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, "rubric must be a JSON object");
  Rubric r;
  try {
    r.id = j.at("id").get<std::string>();
    r.criterion = j.at("criterion").get<std::string>();
    r.weight = j.at("weight").get<double>();
    const auto role = parse_role(j.at("role").get<std::string>());
    if (!role) throw Error(ErrorCode::kParse, "rubric " + r.id + ": unknown role");
    r.role = *role;
    r.rationale = j.value("rationale", std::string{});
    r.fatal = j.value("fatal", false);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed rubric: ") + e.what());
  }
  return r;
}

}  // namespace dr
