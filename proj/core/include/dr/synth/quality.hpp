#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "dr/model.hpp"

namespace dr::synth {

/// Text inside the last <answer>...</answer>, else after the last "Answer:",
/// else the whole reply; trimmed.
std::string extract_final_answer(const std::string& reply);

/// Normalized exact match of the extracted answer against the reference.
bool answers_match(const std::string& reply, const std::string& reference);

/// Anything that answers a question end to end (a ReAct episode, a scripted
/// stub). Throwing signals a failed run.
using AnswerAgent = std::function<std::string(const std::string& question)>;

enum class Difficulty { kKeep, kDropSimple };

struct DifficultyDecision {
  Difficulty decision = Difficulty::kKeep;
  bool flagged = false;  // baseline failed; kept without a verdict
  std::string baseline_answer;
  std::string note;
};

DifficultyDecision difficulty_filter(const std::string& question, const std::string& reference,
                                     const AnswerAgent& baseline);

using AnswerVerifier = std::function<bool(const std::string& reply, const std::string& reference)>;

enum class ReflectionResult { kPositive, kReflective, kRejected };
std::string to_string(ReflectionResult r);

struct ReflectionOutcome {
  ReflectionResult result = ReflectionResult::kRejected;
  std::vector<Message> transcript;
  std::size_t rounds = 0;            // generation rounds used
  std::size_t reflection_turns = 0;  // reflection prompts appended
};

struct ReflectionOptions {
  std::size_t max_rounds = 3;
  std::string reflection_prompt =
      "Your answer is incorrect. Re-examine your reasoning, find the mistake and answer again.";
  std::vector<std::string> scrub_patterns;  // empty: default_induced_phrase_patterns()
};

/// Asks, verifies, and on a miss appends a reflection prompt and asks again
/// with the history retained. Assistant turns of a reflective transcript are
/// scrubbed of induced phrases. Model errors propagate.
ReflectionOutcome reflection_loop(const std::string& question, const std::string& reference,
                                  ModelClient& expert, const AnswerVerifier& verifier = answers_match,
                                  const ReflectionOptions& options = {});

/// Case-insensitive ECMAScript patterns for phrases that leak the reflection
/// hint into a trajectory.
std::vector<std::string> default_induced_phrase_patterns();

/// Removes every sentence that overlaps a pattern match and repeats until no
/// pattern matches. Idempotent.
std::string scrub_induced_phrases(const std::string& text, const std::vector<std::string>& patterns);

}  // namespace dr::synth
