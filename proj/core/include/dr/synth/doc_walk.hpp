#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dr/jsonl.hpp"
#include "dr/model.hpp"
#include "dr/random.hpp"

namespace dr::synth {

struct LinkedDoc {
  std::string doc_id;
  std::string text;
  std::vector<std::string> links;
};

/// Documents keyed by id; JSON Lines of {doc_id, text, links}.
using DocCollection = std::map<std::string, LinkedDoc>;
DocCollection load_linked_docs(const std::filesystem::path& path);

enum class WalkStop { kMaxSteps, kModelStop, kDeadEnd, kInvalidChoice };
std::string to_string(WalkStop s);

struct WalkTrace {
  std::vector<std::string> visited;  // in visiting order, start first
  WalkStop stop = WalkStop::kMaxSteps;
};

/// Follows at most `max_steps` hyperlinks from `start`. At each document the
/// model picks one unvisited link ({"next": id}) or ends the walk
/// ({"stop": true}). Links to missing or visited documents are never offered.
WalkTrace doc_walk(const DocCollection& docs, const std::string& start, std::size_t max_steps,
                   ModelClient& model);

/// Same traversal with links picked uniformly by the seeded stream; used when
/// no model is configured. Never stops before a dead end or max_steps.
WalkTrace random_walk(const DocCollection& docs, const std::string& start, std::size_t max_steps, Rng& rng);

struct WalkQa {
  std::string question;
  std::string answer;
  std::vector<std::string> documents;  // visited docs the question draws on
  std::size_t attempts = 0;
};

/// Consolidates the walk into {"question", "answer", "documents"}; the pair
/// must draw on at least two visited documents. Throws
/// dr::Error(kInsufficientFacts) for single-document walks and
/// dr::Error(kContractUnsatisfiable) after `max_attempts`.
WalkQa walk_to_qa(const DocCollection& docs, const WalkTrace& trace, ModelClient& model,
                  std::size_t max_attempts = 3);

}  // namespace dr::synth
