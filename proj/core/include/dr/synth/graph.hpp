#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "dr/random.hpp"

namespace dr::synth {

struct Triple {
  std::string head;
  std::string relation;
  std::string tail;

  auto operator<=>(const Triple&) const = default;
};

/// Directed labeled multigraph. Degree counts in- plus out-edges, so a
/// self-loop adds 2.
class KnowledgeGraph {
 public:
  /// Adds the entity if missing; a nonempty label overwrites the old one.
  std::size_t add_entity(const std::string& id, const std::string& label = {});
  void add_edge(const Triple& t);

  /// Tab-separated head/relation/tail lines; optional id<TAB>label file.
  static KnowledgeGraph load(const std::filesystem::path& triples,
                             const std::optional<std::filesystem::path>& labels = std::nullopt);

  std::size_t size() const { return ids_.size(); }
  bool contains(const std::string& id) const { return index_.count(id) != 0; }
  std::size_t index_of(const std::string& id) const;
  const std::string& id(std::size_t i) const { return ids_[i]; }
  const std::string& label(std::size_t i) const { return labels_[i]; }
  const std::string& label(const std::string& id) const { return labels_[index_of(id)]; }
  std::size_t degree(std::size_t i) const { return degree_[i]; }
  std::size_t degree(const std::string& id) const { return degree_[index_of(id)]; }
  /// Distinct neighbors in either direction, ascending by id.
  std::vector<std::size_t> neighbors(std::size_t i) const;
  const std::vector<Triple>& edges() const { return edges_; }
  /// Edge indices touching entity i.
  const std::vector<std::size_t>& incident(std::size_t i) const { return incident_[i]; }

 private:
  std::vector<std::string> ids_;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::size_t> degree_;
  std::vector<std::vector<std::size_t>> incident_;
  std::vector<Triple> edges_;
};

struct SamplerConfig {
  std::size_t min_seed_degree = 3;
  std::size_t max_seed_degree = 10;
  std::size_t min_nodes = 10;
  std::size_t max_nodes = 40;
  std::size_t supernode_threshold = 1000;  // degree above this: leaf only
};

struct SubgraphSample {
  std::string seed;
  std::set<std::string> nodes;
  std::vector<Triple> edges;  // induced, sorted
  std::set<std::string> truncated_supernodes;
  std::map<std::string, std::string> discovered_via;  // node -> BFS parent
};

/// Uniform over entities with degree in the configured range that are not
/// stoplisted. Throws dr::Error(kNoEligibleSeed).
std::string sample_seed(const KnowledgeGraph& graph, const std::set<std::string>& stoplist, Rng& rng,
                        const SamplerConfig& config = {});

/// Layer-by-layer BFS from `seed`; each frontier's neighbor list is shuffled.
/// Stops after the layer that brings the node count to min_nodes, never
/// exceeding max_nodes. Supernodes join the sample but are not expanded.
/// Throws dr::Error(kGraphTooSmall) when the reachable part is too small.
SubgraphSample expand_subgraph(const KnowledgeGraph& graph, const std::string& seed, Rng& rng,
                               const SamplerConfig& config = {});

std::set<std::string> load_stoplist(const std::filesystem::path& path);

}  // namespace dr::synth
