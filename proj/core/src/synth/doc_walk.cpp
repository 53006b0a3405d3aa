#include "dr/synth/doc_walk.hpp"

#include <algorithm>
#include <optional>
#include <set>

#include <fmt/format.h>

#include "dr/error.hpp"
#include "dr/text.hpp"

namespace dr::synth {

namespace {

constexpr std::size_t kExcerpt = 1500;

}  // namespace

DocCollection load_linked_docs(const std::filesystem::path& path) {
  DocCollection docs;
  for (const auto& row : read_jsonl(path)) {
    LinkedDoc d;
    d.doc_id = row.at("doc_id").get<std::string>();
    d.text = row.value("text", std::string{});
    if (auto it = row.find("links"); it != row.end()) d.links = it->get<std::vector<std::string>>();
    if (!docs.emplace(d.doc_id, d).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate doc_id: " + d.doc_id);
    }
  }
  return docs;
}

std::string to_string(WalkStop s) {
  switch (s) {
    case WalkStop::kMaxSteps: return "max_steps";
    case WalkStop::kModelStop: return "model_stop";
    case WalkStop::kDeadEnd: return "dead_end";
    case WalkStop::kInvalidChoice: return "invalid_choice";
  }
  return "unknown";
}

namespace {

// Chooser returns the next doc id, or nullopt to stop; a value outside the
// offered options ends the walk as an invalid choice.
template <typename Chooser>
WalkTrace walk(const DocCollection& docs, const std::string& start, std::size_t max_steps, Chooser&& choose) {
  if (max_steps == 0) throw Error(ErrorCode::kInvalidArgument, "max_steps must be at least 1");
  if (!docs.count(start)) throw Error(ErrorCode::kNotFound, "unknown start document: " + start);

  WalkTrace trace;
  trace.visited.push_back(start);
  std::set<std::string> seen{start};
  for (std::size_t step = 0; step < max_steps; ++step) {
    const auto& cur = docs.at(trace.visited.back());
    std::vector<std::string> options;
    for (const auto& l : cur.links) {
      if (docs.count(l) && !seen.count(l)) options.push_back(l);
    }
    std::sort(options.begin(), options.end());
    options.erase(std::unique(options.begin(), options.end()), options.end());
    if (options.empty()) {
      trace.stop = WalkStop::kDeadEnd;
      return trace;
    }
    const std::optional<std::string> next = choose(cur, options);
    if (!next) {
      trace.stop = WalkStop::kModelStop;
      return trace;
    }
    if (!std::binary_search(options.begin(), options.end(), *next)) {
      trace.stop = WalkStop::kInvalidChoice;
      return trace;
    }
    trace.visited.push_back(*next);
    seen.insert(*next);
  }
  trace.stop = WalkStop::kMaxSteps;
  return trace;
}

}  // namespace

WalkTrace doc_walk(const DocCollection& docs, const std::string& start, std::size_t max_steps,
                   ModelClient& model) {
  std::string notes;
  return walk(docs, start, max_steps,
              [&](const LinkedDoc& cur, const std::vector<std::string>& options) -> std::optional<std::string> {
                notes += fmt::format("[{}] {}\n", cur.doc_id,
                                     text::collapse_whitespace(text::utf8_prefix(cur.text, kExcerpt)));
                std::string prompt = fmt::format(
                    "You are collecting facts for a question that needs several documents.\n"
                    "Documents read so far:\n{}\nLinks available from {}:\n",
                    notes, cur.doc_id);
                for (const auto& o : options) prompt += "- " + o + "\n";
                prompt += "Reply with JSON {\"next\": \"<doc id>\"} to follow a link, or {\"stop\": true} "
                          "once the collected information is sufficient.";
                const auto reply = extract_json(model.complete({{{"user", prompt}}, 1024, 0.0}).text);
                if (reply && reply->is_object() && reply->value("stop", false)) return std::nullopt;
                return reply && reply->is_object() ? reply->value("next", std::string{}) : std::string{};
              });
}

WalkTrace random_walk(const DocCollection& docs, const std::string& start, std::size_t max_steps, Rng& rng) {
  return walk(docs, start, max_steps,
              [&](const LinkedDoc&, const std::vector<std::string>& options) -> std::optional<std::string> {
                return options[uniform_index(rng, options.size())];
              });
}

WalkQa walk_to_qa(const DocCollection& docs, const WalkTrace& trace, ModelClient& model,
                  std::size_t max_attempts) {
  if (trace.visited.size() < 2) {
    throw Error(ErrorCode::kInsufficientFacts, "walk visited fewer than two documents");
  }
  std::string prompt =
      "Write one question whose answer requires combining facts from at least two of these "
      "documents. Reply with JSON {\"question\": str, \"answer\": str, \"documents\": [doc ids "
      "used]}.\n\n";
  for (const auto& id : trace.visited) {
    prompt += fmt::format("[{}]\n{}\n\n", id, text::utf8_prefix(docs.at(id).text, kExcerpt));
  }
  const std::set<std::string> visited(trace.visited.begin(), trace.visited.end());
  std::vector<Message> messages{{"user", prompt}};
  std::string problem;
  for (std::size_t attempt = 1; attempt <= max_attempts; ++attempt) {
    const auto text_reply = model.complete({messages, 4096, 0.0}).text;
    messages.push_back({"assistant", text_reply});
    const auto j = extract_json(text_reply);
    problem.clear();
    std::set<std::string> used;
    if (!j || !j->is_object() || !(*j)["question"].is_string() || !(*j)["answer"].is_string() ||
        !(*j)["documents"].is_array()) {
      problem = "reply must be JSON with question, answer and documents";
    } else {
      for (const auto& d : (*j)["documents"]) {
        if (d.is_string() && visited.count(d.get<std::string>())) used.insert(d.get<std::string>());
      }
      if (used.size() < 2) problem = "the question must draw on at least two visited documents";
      if (text::trim((*j)["question"].get<std::string>()).empty() ||
          text::trim((*j)["answer"].get<std::string>()).empty()) {
        problem = "question and answer must be nonempty";
      }
    }
    if (problem.empty()) {
      return {text::trim((*j)["question"].get<std::string>()), text::trim((*j)["answer"].get<std::string>()),
              {used.begin(), used.end()}, attempt};
    }
    messages.push_back({"user", "Rejected: " + problem + ". Try again."});
  }
  throw Error(ErrorCode::kContractUnsatisfiable,
              fmt::format("no valid walk question after {} attempt(s): {}", max_attempts, problem));
}

}  // namespace dr::synth
