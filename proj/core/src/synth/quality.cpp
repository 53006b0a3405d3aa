#include "dr/synth/quality.hpp"

#include <regex>

#include "dr/error.hpp"
#include "dr/text.hpp"

namespace dr::synth {

std::string extract_final_answer(const std::string& reply) {
  if (const auto close = reply.rfind("</answer>"); close != std::string::npos) {
    const auto open = reply.rfind("<answer>", close);
    if (open != std::string::npos) return text::trim(reply.substr(open + 8, close - open - 8));
  }
  static const std::regex marker(R"((^|\n)\s*(final\s+)?answer\s*[:：])", std::regex::icase);
  std::size_t pos = std::string::npos;
  for (auto it = std::sregex_iterator(reply.begin(), reply.end(), marker); it != std::sregex_iterator();
       ++it) {
    pos = static_cast<std::size_t>(it->position(0) + it->length(0));
  }
  if (pos != std::string::npos) {
    auto rest = reply.substr(pos);
    return text::trim(rest.substr(0, rest.find('\n')));
  }
  return text::trim(reply);
}

bool answers_match(const std::string& reply, const std::string& reference) {
  const auto got = text::normalize_answer(extract_final_answer(reply));
  return !got.empty() && got == text::normalize_answer(reference);
}

DifficultyDecision difficulty_filter(const std::string& question, const std::string& reference,
                                     const AnswerAgent& baseline) {
  DifficultyDecision d;
  try {
    d.baseline_answer = baseline(question);
  } catch (const std::exception& e) {
    d.flagged = true;
    d.note = std::string("baseline failed, kept: ") + e.what();
    return d;
  }
  if (answers_match(d.baseline_answer, reference)) d.decision = Difficulty::kDropSimple;
  return d;
}

std::string to_string(ReflectionResult r) {
  switch (r) {
    case ReflectionResult::kPositive: return "positive";
    case ReflectionResult::kReflective: return "reflective";
    case ReflectionResult::kRejected: return "rejected";
  }
  return "unknown";
}

ReflectionOutcome reflection_loop(const std::string& question, const std::string& reference,
                                  ModelClient& expert, const AnswerVerifier& verifier,
                                  const ReflectionOptions& options) {
  if (options.max_rounds == 0) throw Error(ErrorCode::kInvalidArgument, "max_rounds must be positive");
  ReflectionOutcome out;
  out.transcript.push_back({"user", question});
  while (out.rounds < options.max_rounds) {
    ++out.rounds;
    const auto reply = expert.complete({out.transcript, 16384, 0.0}).text;
    out.transcript.push_back({"assistant", reply});
    if (verifier(reply, reference)) {
      if (out.rounds == 1) {
        out.result = ReflectionResult::kPositive;
        return out;
      }
      out.result = ReflectionResult::kReflective;
      const auto patterns =
          options.scrub_patterns.empty() ? default_induced_phrase_patterns() : options.scrub_patterns;
      for (auto& m : out.transcript) {
        if (m.role == "assistant") m.content = scrub_induced_phrases(m.content, patterns);
      }
      return out;
    }
    if (out.rounds < options.max_rounds) {
      out.transcript.push_back({"user", options.reflection_prompt});
      ++out.reflection_turns;
    }
  }
  out.result = ReflectionResult::kRejected;
  return out;
}

std::vector<std::string> default_induced_phrase_patterns() {
  return {
      R"(according to (the )?(user'?s? )?hints?)",
      R"(based on (the )?(user'?s? )?(hints?|feedback) (provided|given))",
      R"(as (the user|you) (hinted|pointed out|suggested))",
      R"(the (user|hint) (says|said|indicates|indicated) (that )?(my|the) (previous )?answer)",
      R"(根据用户(的)?提示)",
  };
}

std::string scrub_induced_phrases(const std::string& text, const std::vector<std::string>& patterns) {
  std::vector<std::regex> res;
  res.reserve(patterns.size());
  for (const auto& p : patterns) {
    try {
      res.emplace_back(p, std::regex::ECMAScript | std::regex::icase);
    } catch (const std::regex_error& e) {
      throw Error(ErrorCode::kInvalidArgument, "bad scrub pattern \"" + p + "\": " + e.what());
    }
  }
  std::string cur = text;
  while (true) {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (const auto& re : res) {
      for (auto it = std::sregex_iterator(cur.begin(), cur.end(), re); it != std::sregex_iterator(); ++it) {
        if (it->length(0) == 0) continue;
        const auto b = static_cast<std::size_t>(it->position(0));
        spans.emplace_back(b, b + static_cast<std::size_t>(it->length(0)));
      }
    }
    if (spans.empty()) return cur;
    std::string next;
    std::size_t offset = 0;
    for (const auto& sentence : text::split_sentences(cur)) {
      const auto b = offset;
      const auto e = offset + sentence.size();
      offset = e;
      bool hit = false;
      for (const auto& [sb, se] : spans) hit = hit || (sb < e && b < se);
      if (!hit) next += sentence;
    }
    cur = std::move(next);
  }
}

}  // namespace dr::synth
