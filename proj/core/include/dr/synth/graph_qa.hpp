#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dr/jsonl.hpp"
#include "dr/model.hpp"
#include "dr/retrieval/search.hpp"
#include "dr/synth/graph.hpp"

namespace dr::synth {

struct VerifiedFact {
  Triple triple;       // entity ids
  std::string fact;    // text of the supporting paragraph
  std::vector<std::string> citations;  // paragraph ids
};

struct TripletCheck {
  bool verified = false;
  VerifiedFact fact;
};

/// Searches for "head relation tail" (labels) and scans the top-k hits for a
/// paragraph mentioning both endpoints. Search errors propagate.
TripletCheck verify_triplet(const Triple& edge, const KnowledgeGraph& graph,
                            retrieval::SearchService& search, std::size_t k = 5);

struct QaPair {
  std::string question;
  std::string answer;
  std::vector<std::string> entities;   // referenced sample entities (ids)
  std::vector<std::string> citations;  // supporting paragraph ids
  std::size_t attempts = 0;
};

struct QuestionOptions {
  std::size_t min_entities = 3;
  std::size_t max_attempts = 3;  // first try plus two retries
};

/// Empty when the reply satisfies the question contract, otherwise the
/// violations found.
std::vector<std::string> question_contract_violations(const Json& reply, const SubgraphSample& sample,
                                                      const KnowledgeGraph& graph,
                                                      const QuestionOptions& options = {});

/// Asks the model for {"question", "answer", "entities"} grounded in the
/// verified facts. Throws dr::Error(kInsufficientFacts) before calling the
/// model and dr::Error(kContractUnsatisfiable) once attempts run out.
QaPair generate_graph_question(const SubgraphSample& sample, const std::vector<VerifiedFact>& facts,
                               const KnowledgeGraph& graph, ModelClient& model,
                               const QuestionOptions& options = {});

}  // namespace dr::synth
