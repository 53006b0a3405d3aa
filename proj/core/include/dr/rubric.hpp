#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace dr {

enum class RubricRole { kExplicit, kImplicit, kNegative };

/// Ternary judge verdict. Canonical scores are 0, 0.5 and 1.
enum class Verdict { kNotSatisfied, kPartiallySatisfied, kFullySatisfied };

/// One atomic evaluation criterion. Negative rubrics carry negative weight.
struct Rubric {
  std::string id;
  std::string criterion;
  double weight = 1.0;
  RubricRole role = RubricRole::kExplicit;
  std::string rationale;
  // A triggered fatal negative rubric zeroes the report score.
  bool fatal = false;
};

/// Explicit and implicit rubrics are both "positive" for reward mapping.
constexpr bool is_positive(RubricRole role) { return role != RubricRole::kNegative; }

std::string_view to_string(RubricRole role);
std::optional<RubricRole> parse_role(std::string_view s);
std::string_view to_string(Verdict v);
/// Accepts snake_case names ("partially_satisfied") and judge labels
/// ("Partially Satisfied"), case-insensitively.
std::optional<Verdict> parse_verdict(std::string_view s);

nlohmann::json to_json(const Rubric& r);
/// Throws dr::Error(kParse) on missing fields or an unknown role.
Rubric rubric_from_json(const nlohmann::json& j);

}  // namespace dr
