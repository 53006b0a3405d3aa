#include "dr/synth/graph.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>

#include "dr/error.hpp"
#include "dr/text.hpp"

namespace dr::synth {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(text::trim(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start)));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

}  // namespace

std::size_t KnowledgeGraph::add_entity(const std::string& id, const std::string& label) {
  if (id.empty()) throw Error(ErrorCode::kInvalidArgument, "entity id is empty");
  auto [it, inserted] = index_.emplace(id, ids_.size());
  if (inserted) {
    ids_.push_back(id);
    labels_.push_back(label.empty() ? id : label);
    degree_.push_back(0);
    incident_.emplace_back();
  } else if (!label.empty()) {
    labels_[it->second] = label;
  }
  return it->second;
}

void KnowledgeGraph::add_edge(const Triple& t) {
  const auto h = add_entity(t.head);
  const auto tl = add_entity(t.tail);
  const auto e = edges_.size();
  edges_.push_back(t);
  ++degree_[h];
  ++degree_[tl];
  incident_[h].push_back(e);
  if (tl != h) incident_[tl].push_back(e);
}

std::size_t KnowledgeGraph::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error(ErrorCode::kNotFound, "unknown entity: " + id);
  return it->second;
}

std::vector<std::size_t> KnowledgeGraph::neighbors(std::size_t i) const {
  std::vector<std::size_t> out;
  for (auto e : incident_[i]) {
    const auto& t = edges_[e];
    const auto other = index_.at(t.head) == i ? index_.at(t.tail) : index_.at(t.head);
    if (other != i) out.push_back(other);
  }
  std::sort(out.begin(), out.end(), [this](std::size_t a, std::size_t b) { return ids_[a] < ids_[b]; });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

KnowledgeGraph KnowledgeGraph::load(const std::filesystem::path& triples,
                                    const std::optional<std::filesystem::path>& labels) {
  KnowledgeGraph g;
  std::ifstream in(triples);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + triples.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty() || line.front() == '#') continue;
    const auto f = split_tabs(line);
    if (f.size() != 3 || f[0].empty() || f[1].empty() || f[2].empty()) {
      throw Error(ErrorCode::kParse,
                  fmt::format("{}:{}: expected head<TAB>relation<TAB>tail", triples.string(), lineno));
    }
    g.add_edge({f[0], f[1], f[2]});
  }
  if (labels) {
    std::ifstream lin(*labels);
    if (!lin) throw Error(ErrorCode::kIo, "cannot open " + labels->string());
    while (std::getline(lin, line)) {
      if (text::trim(line).empty() || line.front() == '#') continue;
      const auto f = split_tabs(line);
      if (f.size() >= 2 && g.contains(f[0])) g.add_entity(f[0], f[1]);
    }
  }
  return g;
}

std::string sample_seed(const KnowledgeGraph& graph, const std::set<std::string>& stoplist, Rng& rng,
                        const SamplerConfig& config) {
  std::vector<std::string> eligible;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const auto d = graph.degree(i);
    if (d >= config.min_seed_degree && d <= config.max_seed_degree && !stoplist.count(graph.id(i))) {
      eligible.push_back(graph.id(i));
    }
  }
  if (eligible.empty()) {
    throw Error(ErrorCode::kNoEligibleSeed,
                fmt::format("no entity with degree in [{}, {}] outside the stoplist",
                            config.min_seed_degree, config.max_seed_degree));
  }
  std::sort(eligible.begin(), eligible.end());
  return eligible[uniform_index(rng, eligible.size())];
}

SubgraphSample expand_subgraph(const KnowledgeGraph& graph, const std::string& seed, Rng& rng,
                               const SamplerConfig& config) {
  if (config.min_nodes == 0 || config.min_nodes > config.max_nodes) {
    throw Error(ErrorCode::kInvalidArgument, "node range must satisfy 0 < min <= max");
  }
  const auto root = graph.index_of(seed);
  SubgraphSample s;
  s.seed = seed;
  std::vector<bool> in_sample(graph.size(), false);
  std::vector<std::size_t> members{root};
  in_sample[root] = true;
  auto is_super = [&](std::size_t v) { return graph.degree(v) > config.supernode_threshold; };
  if (is_super(root)) s.truncated_supernodes.insert(seed);

  std::vector<std::size_t> frontier{root};
  while (!frontier.empty() && members.size() < config.min_nodes) {
    std::vector<std::size_t> next;
    for (auto u : frontier) {
      if (is_super(u)) continue;
      auto nbrs = graph.neighbors(u);
      shuffle(nbrs, rng);
      for (auto v : nbrs) {
        if (in_sample[v]) continue;
        if (members.size() == config.max_nodes) break;
        in_sample[v] = true;
        members.push_back(v);
        s.discovered_via[graph.id(v)] = graph.id(u);
        if (is_super(v)) s.truncated_supernodes.insert(graph.id(v));
        next.push_back(v);
      }
      if (members.size() == config.max_nodes) break;
    }
    frontier = std::move(next);
  }
  if (members.size() < config.min_nodes) {
    throw Error(ErrorCode::kGraphTooSmall,
                fmt::format("only {} node(s) reachable from {} without expanding supernodes, need {}",
                            members.size(), seed, config.min_nodes));
  }

  for (auto m : members) s.nodes.insert(graph.id(m));
  std::set<std::size_t> edge_ids;
  for (auto m : members) {
    for (auto e : graph.incident(m)) {
      const auto& t = graph.edges()[e];
      if (s.nodes.count(t.head) && s.nodes.count(t.tail)) edge_ids.insert(e);
    }
  }
  for (auto e : edge_ids) s.edges.push_back(graph.edges()[e]);
  std::sort(s.edges.begin(), s.edges.end());
  return s;
}

std::set<std::string> load_stoplist(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open stoplist " + path.string());
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto t = text::trim(line);
    if (!t.empty() && t.front() != '#') out.insert(std::move(t));
  }
  return out;
}

}  // namespace dr::synth
