#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "dr/jsonl.hpp"
#include "dr/model.hpp"
#include "dr/retrieval/search.hpp"
#include "dr/synth/doc_walk.hpp"
#include "dr/synth/graph.hpp"
#include "dr/synth/graph_qa.hpp"

namespace dr::synth {

/// {"pipeline", "master_seed", "sample_index", "seed", "decisions"}.
Json provenance(const std::string& pipeline, std::uint64_t master_seed, std::size_t index,
                const Json& decisions);

struct GraphPipelineConfig {
  std::size_t samples = 10;
  std::uint64_t seed = 0;
  SamplerConfig sampler;
  QuestionOptions question;
  std::size_t verify_k = 5;
  std::size_t jobs = 1;
};

/// One output row per sample, in sample order. `search` and `model` may be
/// null: without search no edge is verified, without a model no question is
/// written. Rows carry the sample's status and provenance.
std::vector<Json> run_graph_pipeline(const KnowledgeGraph& graph, const std::set<std::string>& stoplist,
                                     retrieval::SearchService* search, ModelClient* model,
                                     const GraphPipelineConfig& config);

struct WalkPipelineConfig {
  std::size_t samples = 10;
  std::uint64_t seed = 0;
  std::size_t max_steps = 4;
  std::size_t jobs = 1;
};

/// Start documents are drawn per sample from the seeded stream. With a model
/// the model walks and writes the question; without one the walk is random
/// and no question is written.
std::vector<Json> run_walk_pipeline(const DocCollection& docs, ModelClient* model,
                                    const WalkPipelineConfig& config);

struct RubricPipelineConfig {
  std::size_t samples = 1;
  std::uint64_t seed = 0;
  std::size_t seeds_per_sample = 3;
  double consistency_threshold = 0.8;
  std::size_t jobs = 1;
};

/// Rubric drafting, task writing with role reassessment, then the
/// consistency check, per sample.
std::vector<Json> run_rubric_pipeline(const std::vector<std::string>& seed_examples, ModelClient& model,
                                      ModelClient& judge, const RubricPipelineConfig& config);

}  // namespace dr::synth
