#include "dr/synth/graph_qa.hpp"

#include <algorithm>
#include <optional>
#include <set>

#include <fmt/format.h>

#include "dr/error.hpp"
#include "dr/text.hpp"

namespace dr::synth {

namespace {

bool mentions(std::string_view haystack, std::string_view phrase) {
  const auto h = " " + text::normalize_answer(haystack) + " ";
  const auto p = text::normalize_answer(phrase);
  return !p.empty() && h.find(" " + p + " ") != std::string::npos;
}

std::optional<std::string> resolve_entity(const std::string& name, const SubgraphSample& sample,
                                          const KnowledgeGraph& graph) {
  if (sample.nodes.count(name)) return name;
  const auto wanted = text::normalize_answer(name);
  if (wanted.empty()) return std::nullopt;
  for (const auto& id : sample.nodes) {
    if (text::normalize_answer(graph.label(id)) == wanted) return id;
  }
  return std::nullopt;
}

std::string question_prompt(const SubgraphSample& sample, const std::vector<VerifiedFact>& facts,
                            const KnowledgeGraph& graph, const QuestionOptions& options) {
  std::string p = fmt::format(
      "Write one multi-hop research question from the verified facts below.\n"
      "Rules: the answer is one of the listed entities; the question chains at least {} "
      "entities but describes them indirectly; never name the answer entity in the question.\n"
      "Reply with JSON: {{\"question\": str, \"answer\": str, \"entities\": [entity ids]}}.\n\n"
      "Entities:\n",
      options.min_entities);
  for (const auto& id : sample.nodes) p += fmt::format("- {} ({})\n", id, graph.label(id));
  p += "\nVerified facts:\n";
  for (const auto& f : facts) {
    p += fmt::format("- ({}, {}, {}): {}\n", graph.label(f.triple.head), f.triple.relation,
                     graph.label(f.triple.tail), text::collapse_whitespace(f.fact));
  }
  return p;
}

}  // namespace

TripletCheck verify_triplet(const Triple& edge, const KnowledgeGraph& graph,
                            retrieval::SearchService& search, std::size_t k) {
  const auto& head = graph.label(edge.head);
  const auto& tail = graph.label(edge.tail);
  retrieval::SearchParams params;
  params.k = k;
  const auto hits = search.search(fmt::format("{} {} {}", head, edge.relation, tail), params);
  for (const auto& h : hits) {
    if (text::contains_folded(h.snippet, head) && text::contains_folded(h.snippet, tail)) {
      return {true, {edge, h.snippet, {h.para_id}}};
    }
  }
  return {false, {edge, {}, {}}};
}

std::vector<std::string> question_contract_violations(const Json& reply, const SubgraphSample& sample,
                                                      const KnowledgeGraph& graph,
                                                      const QuestionOptions& options) {
  std::vector<std::string> v;
  if (!reply.is_object()) return {"reply is not a JSON object"};
  const auto q = reply.find("question");
  const auto a = reply.find("answer");
  const auto e = reply.find("entities");
  if (q == reply.end() || !q->is_string() || text::trim(q->get<std::string>()).empty()) {
    v.push_back("question must be a nonempty string");
  }
  if (a == reply.end() || !a->is_string() || text::trim(a->get<std::string>()).empty()) {
    v.push_back("answer must be a nonempty string");
  }
  if (e == reply.end() || !e->is_array()) v.push_back("entities must be an array");
  if (!v.empty()) return v;

  const auto question = q->get<std::string>();
  const auto answer = resolve_entity(a->get<std::string>(), sample, graph);
  if (!answer) {
    v.push_back("answer \"" + a->get<std::string>() + "\" is not an entity of the subgraph");
  } else if (mentions(question, graph.label(*answer)) || mentions(question, *answer) ||
             mentions(question, a->get<std::string>())) {
    v.push_back("question names the answer entity");
  }
  std::set<std::string> referenced;
  for (const auto& item : *e) {
    if (!item.is_string()) {
      v.push_back("entities must be strings");
      continue;
    }
    if (auto id = resolve_entity(item.get<std::string>(), sample, graph)) {
      referenced.insert(*id);
    } else {
      v.push_back("entity \"" + item.get<std::string>() + "\" is not in the subgraph");
    }
  }
  if (referenced.size() < options.min_entities) {
    v.push_back(fmt::format("question references {} distinct entities, needs {}", referenced.size(),
                            options.min_entities));
  }
  return v;
}

QaPair generate_graph_question(const SubgraphSample& sample, const std::vector<VerifiedFact>& facts,
                               const KnowledgeGraph& graph, ModelClient& model,
                               const QuestionOptions& options) {
  if (facts.size() < options.min_entities) {
    throw Error(ErrorCode::kInsufficientFacts,
                fmt::format("{} verified fact(s), need {}", facts.size(), options.min_entities));
  }
  std::vector<Message> messages{{"user", question_prompt(sample, facts, graph, options)}};
  std::vector<std::string> last;
  for (std::size_t attempt = 1; attempt <= options.max_attempts; ++attempt) {
    const auto reply = model.complete({messages, 4096, 0.0});
    messages.push_back({"assistant", reply.text});
    const auto parsed = extract_json(reply.text);
    last = parsed ? question_contract_violations(*parsed, sample, graph, options)
                  : std::vector<std::string>{"reply contains no JSON object"};
    if (last.empty()) {
      QaPair qa;
      qa.question = text::trim((*parsed)["question"].get<std::string>());
      qa.answer = graph.label(*resolve_entity((*parsed)["answer"].get<std::string>(), sample, graph));
      std::set<std::string> ids;
      for (const auto& item : (*parsed)["entities"]) {
        ids.insert(*resolve_entity(item.get<std::string>(), sample, graph));
      }
      qa.entities.assign(ids.begin(), ids.end());
      std::set<std::string> cites;
      for (const auto& f : facts) {
        if (ids.count(f.triple.head) || ids.count(f.triple.tail)) {
          cites.insert(f.citations.begin(), f.citations.end());
        }
      }
      qa.citations.assign(cites.begin(), cites.end());
      qa.attempts = attempt;
      return qa;
    }
    std::string feedback = "The reply was rejected:\n";
    for (const auto& x : last) feedback += "- " + x + "\n";
    feedback += "Try again following every rule.";
    messages.push_back({"user", std::move(feedback)});
  }
  std::string joined;
  for (const auto& x : last) joined += (joined.empty() ? "" : "; ") + x;
  throw Error(ErrorCode::kContractUnsatisfiable,
              fmt::format("no valid question after {} attempt(s): {}", options.max_attempts, joined));
}

}  // namespace dr::synth
