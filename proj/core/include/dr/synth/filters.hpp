#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dr/agent/trajectory.hpp"
#include "dr/jsonl.hpp"
#include "dr/random.hpp"
#include "dr/time.hpp"

namespace dr::synth {

// Every filter is a pure function of its arguments.

/// Jaccard similarity of the token sets of two texts; 0 when both are empty.
double token_jaccard(const std::string& a, const std::string& b);

/// Text of each tool call (name plus argument values), in execution order.
std::vector<std::string> action_texts(const agent::Trajectory& t);

struct AlignmentOptions {
  double step_match = 0.5;  // Jaccard needed for an action to satisfy a plan step
  double keep = 0.75;       // fraction of plan steps that must be matched in order
};

struct AlignmentDecision {
  bool keep = true;
  double alignment = 1.0;
  std::size_t matched = 0;
};

/// Longest in-order matching of plan steps to actions.
AlignmentDecision plan_alignment_filter(const agent::Trajectory& t, const std::vector<std::string>& plan,
                                        const AlignmentOptions& options = {});

/// Indices of the trajectories with the fewest steps; ties all kept.
std::vector<std::size_t> select_shortest_correct(const std::vector<agent::Trajectory>& successful);

/// As above, after keeping only reports whose final answer matches `reference`.
std::vector<std::size_t> select_shortest_correct(const std::vector<agent::Trajectory>& candidates,
                                                 const std::string& reference);

/// Largest (occurrences - 1) over all token n-grams of the text.
std::size_t max_ngram_repeats(const std::string& text, std::size_t n);

/// Model-written text of a trajectory (step outputs), excluding tool payloads.
std::string generated_text(const agent::Trajectory& t);

/// Indices of trajectories whose max n-gram repetition is at most `threshold`.
std::vector<std::size_t> ngram_dedup(const std::vector<agent::Trajectory>& ts, std::size_t n,
                                     std::size_t threshold);

/// Four-digit years 1900-2099 appearing as whole tokens.
std::vector<int> year_tokens(const std::string& text);

/// Every string value nested anywhere in a JSON value.
std::vector<std::string> string_leaves(const Json& j);

/// false (drop) when the task names no year but some tool call's arguments
/// carry a year earlier than `now`'s.
bool temporal_filter(const agent::Trajectory& t, Timestamp now);

enum class Script { kLatin, kCjk };

/// Foreign-script letters over all Latin and CJK letters of `segment`; 0 when
/// the segment has neither.
double foreign_script_density(const std::string& segment, Script primary);

/// Prose paragraphs of a text with fenced code blocks and tool-call blocks
/// removed.
std::vector<std::string> prose_segments(const std::string& text);

/// false (drop) when any prose segment of the generated text exceeds the
/// density threshold.
bool language_mix_filter(const agent::Trajectory& t, Script primary, double density_threshold);
bool language_mix_filter(const std::string& text, Script primary, double density_threshold);

enum class NoiseClass { kClean, kRecovered, kUnrecovered };
std::string to_string(NoiseClass c);

/// kRecovered: some tool call failed or came back empty and a later call of
/// the same tool succeeded. kUnrecovered: a failure with no such recovery.
NoiseClass classify_noise(const agent::Trajectory& t);

struct NoiseRetention {
  std::vector<std::size_t> kept;     // ascending
  std::vector<std::size_t> flagged;  // kept trajectories that carry recovered noise
};

/// Keeps every clean trajectory plus recovered-noise trajectories up to
/// `ratio` of the kept set, picked with the seeded stream. Unrecovered ones
/// are dropped.
NoiseRetention retain_noise(const std::vector<agent::Trajectory>& ts, double ratio, Rng& rng);

/// Rewrites "[key]" references to "\cite{key}" for keys in `sources`.
std::string normalize_citations(const std::string& report, const std::vector<agent::Source>& sources);

/// Keep iff the trajectory has a report, cites at least one source with
/// \cite{} and has no dangling keys.
bool citation_format_filter(const agent::Trajectory& t);

}  // namespace dr::synth
