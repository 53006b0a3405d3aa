#include "dr/synth/pipeline.hpp"

#include "dr/error.hpp"
#include "dr/parallel.hpp"
#include "dr/random.hpp"
#include "dr/synth/rubric_synth.hpp"

namespace dr::synth {

namespace {

Json triple_json(const Triple& t) { return Json::array({t.head, t.relation, t.tail}); }

Json failure_row(const std::string& pipeline, std::uint64_t master, std::size_t i, const Error& e,
                 Json decisions) {
  decisions.push_back({{"stage", "abort"}, {"error", error_code_name(e.code())}, {"message", e.what()}});
  return {{"sample_index", i},
          {"status", error_code_name(e.code())},
          {"provenance", provenance(pipeline, master, i, decisions)}};
}

}  // namespace

Json provenance(const std::string& pipeline, std::uint64_t master_seed, std::size_t index,
                const Json& decisions) {
  return {{"pipeline", pipeline},
          {"master_seed", master_seed},
          {"sample_index", index},
          {"seed", stream_seed(master_seed, index)},
          {"decisions", decisions}};
}

std::vector<Json> run_graph_pipeline(const KnowledgeGraph& graph, const std::set<std::string>& stoplist,
                                     retrieval::SearchService* search, ModelClient* model,
                                     const GraphPipelineConfig& config) {
  return parallel_map(config.samples, config.jobs, [&](std::size_t i) -> Json {
    Rng rng(stream_seed(config.seed, i));
    Json decisions = Json::array();
    try {
      const auto seed = sample_seed(graph, stoplist, rng, config.sampler);
      const auto sample = expand_subgraph(graph, seed, rng, config.sampler);
      decisions.push_back({{"stage", "subgraph"},
                           {"seed_entity", seed},
                           {"nodes", sample.nodes.size()},
                           {"truncated_supernodes", sample.truncated_supernodes}});
      Json row{{"sample_index", i}, {"seed_entity", seed}};
      Json edges = Json::array();
      for (const auto& e : sample.edges) edges.push_back(triple_json(e));
      row["subgraph"] = {{"nodes", sample.nodes},
                         {"edges", edges},
                         {"truncated_supernodes", sample.truncated_supernodes}};

      std::vector<VerifiedFact> facts;
      std::size_t unverified = 0;
      if (search) {
        for (const auto& e : sample.edges) {
          auto check = verify_triplet(e, graph, *search, config.verify_k);
          if (check.verified) {
            facts.push_back(std::move(check.fact));
          } else {
            ++unverified;
          }
        }
      }
      Json fj = Json::array();
      for (const auto& f : facts) {
        fj.push_back({{"triple", triple_json(f.triple)}, {"fact", f.fact}, {"citations", f.citations}});
      }
      row["facts"] = fj;
      decisions.push_back({{"stage", "verify_triplets"},
                           {"verified", facts.size()},
                           {"unverified", unverified},
                           {"searched", search != nullptr}});

      if (!model) {
        row["status"] = "subgraph_only";
      } else {
        const auto qa = generate_graph_question(sample, facts, graph, *model, config.question);
        row["qa"] = {{"question", qa.question},
                     {"answer", qa.answer},
                     {"entities", qa.entities},
                     {"citations", qa.citations}};
        decisions.push_back({{"stage", "question"}, {"attempts", qa.attempts}});
        row["status"] = "ok";
      }
      row["provenance"] = provenance("graph", config.seed, i, decisions);
      return row;
    } catch (const Error& e) {
      return failure_row("graph", config.seed, i, e, decisions);
    }
  });
}

std::vector<Json> run_walk_pipeline(const DocCollection& docs, ModelClient* model,
                                    const WalkPipelineConfig& config) {
  if (docs.empty()) throw Error(ErrorCode::kInvalidArgument, "document collection is empty");
  std::vector<std::string> ids;
  for (const auto& [id, _] : docs) ids.push_back(id);
  return parallel_map(config.samples, config.jobs, [&](std::size_t i) -> Json {
    Rng rng(stream_seed(config.seed, i));
    Json decisions = Json::array();
    try {
      const auto& start = ids[uniform_index(rng, ids.size())];
      const auto trace = model ? doc_walk(docs, start, config.max_steps, *model)
                               : random_walk(docs, start, config.max_steps, rng);
      decisions.push_back({{"stage", "walk"},
                           {"start", start},
                           {"visited", trace.visited.size()},
                           {"stop", to_string(trace.stop)},
                           {"walker", model ? "model" : "random"}});
      Json row{{"sample_index", i}, {"walk", trace.visited}, {"stop", to_string(trace.stop)}};
      if (!model) {
        row["status"] = "walk_only";
      } else {
        const auto qa = walk_to_qa(docs, trace, *model);
        row["qa"] = {{"question", qa.question}, {"answer", qa.answer}, {"documents", qa.documents}};
        decisions.push_back({{"stage", "question"}, {"attempts", qa.attempts}});
        row["status"] = "ok";
      }
      row["provenance"] = provenance("walk", config.seed, i, decisions);
      return row;
    } catch (const Error& e) {
      return failure_row("walk", config.seed, i, e, decisions);
    }
  });
}

std::vector<Json> run_rubric_pipeline(const std::vector<std::string>& seed_examples, ModelClient& model,
                                      ModelClient& judge, const RubricPipelineConfig& config) {
  if (seed_examples.empty()) throw Error(ErrorCode::kInvalidArgument, "no seed examples");
  return parallel_map(config.samples, config.jobs, [&](std::size_t i) -> Json {
    Rng rng(stream_seed(config.seed, i));
    Json decisions = Json::array();
    try {
      auto picked = seed_examples;
      shuffle(picked, rng);
      if (picked.size() > config.seeds_per_sample) picked.resize(config.seeds_per_sample);
      const auto draft = synthesize_rubrics(picked, model);
      decisions.push_back({{"stage", "rubrics"},
                           {"attempts", draft.attempts},
                           {"accepted", draft.rubrics.size()},
                           {"rejected", draft.rejected}});
      auto sample = synthesize_task(draft.hidden_summary, draft.rubrics, model);
      decisions.push_back({{"stage", "reassessment"}, {"status", to_string(sample.status)}});
      if (sample.status == SampleStatus::kRetained) {
        apply_consistency(sample, judge, config.consistency_threshold);
        decisions.push_back({{"stage", "consistency"},
                             {"status", to_string(sample.status)},
                             {"score", sample.consistency_score ? Json(*sample.consistency_score) : Json(nullptr)}});
      }
      auto row = to_json(sample);
      row["sample_index"] = i;
      row["provenance"] = provenance("rubrics", config.seed, i, decisions);
      return row;
    } catch (const Error& e) {
      return failure_row("rubrics", config.seed, i, e, decisions);
    }
  });
}

}  // namespace dr::synth
