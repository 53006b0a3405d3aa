#include <doctest.h>

#include <set>

#include "dr/error.hpp"
#include "dr/jsonl.hpp"
#include "dr/model.hpp"
#include "dr/retrieval/index.hpp"
#include "dr/retrieval/search.hpp"
#include "dr/synth/doc_walk.hpp"
#include "dr/synth/filters.hpp"
#include "dr/synth/graph.hpp"
#include "dr/synth/graph_qa.hpp"
#include "dr/synth/pipeline.hpp"
#include "dr/synth/quality.hpp"
#include "dr/synth/rubric_synth.hpp"
#include "dr/synth/verification.hpp"
#include "dr/time.hpp"
#include "graph_gen.hpp"
#include "test_support.hpp"

using namespace dr;
using namespace dr::synth;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected dr::Error");
  return ErrorCode::kInvalidArgument;
}

std::shared_ptr<retrieval::SearchService> fact_search() {
  std::vector<retrieval::Document> corpus{
      {"d1", "ref.example", "Marie Curie was born in Warsaw in 1867.", std::nullopt},
      {"d2", "ref.example", "Warsaw is the capital of Poland.", std::nullopt},
      {"d3", "ref.example", "Solar panels convert sunlight into electricity.", std::nullopt},
      {"d4", "ref.example", "Hydro power uses falling water to turn turbines.", std::nullopt},
  };
  auto idx = std::make_shared<retrieval::ParagraphIndex>(retrieval::build_index(corpus));
  return std::make_shared<retrieval::SearchService>(
      std::make_shared<retrieval::LocalSearchBackend>(idx, retrieval::AuthorityList{}), 100);
}

agent::Trajectory traj(const std::string& query, const std::vector<agent::ToolCall>& calls,
                       std::optional<std::string> report = std::nullopt) {
  agent::Trajectory t;
  t.query = query;
  if (!calls.empty()) {
    agent::Step s;
    s.action = agent::TurnAction{agent::TurnAction::Kind::kToolCalls, calls, {}, {}, 10};
    s.output = "searching";
    for (const auto& c : calls) s.observations.push_back({c.name, "result", false, false, {}});
    t.steps.push_back(s);
  }
  if (report) {
    agent::Step s;
    s.action = agent::TurnAction{agent::TurnAction::Kind::kFinalReport, {}, *report, {}, 10};
    s.output = *report;
    t.steps.push_back(s);
    t.final_report = report;
    t.termination = agent::Termination::kReportDelivered;
  }
  return t;
}

agent::Trajectory with_observations(std::vector<std::pair<std::string, bool>> obs, bool report = true) {
  agent::Trajectory t;
  for (const auto& [tool, failed] : obs) {
    agent::Step s;
    s.action = agent::TurnAction{agent::TurnAction::Kind::kToolCalls, {{tool, Json::object()}}, {}, {}, 1};
    s.observations.push_back({tool, failed ? "" : "ok", failed, false, {}});
    t.steps.push_back(s);
  }
  if (report) t.final_report = "done";
  return t;
}

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("knowledge graph degrees and neighbors") {
    KnowledgeGraph g;
    g.add_edge({"a", "r", "b"});
    g.add_edge({"a", "s", "b"});
    g.add_edge({"c", "r", "c"});
    CHECK(g.degree("a") == 2);
    CHECK(g.degree("c") == 2);
    CHECK(g.neighbors(g.index_of("b")) == std::vector<std::size_t>{g.index_of("a")});
    CHECK(code_of([&] { (void)g.index_of("zz"); }) == ErrorCode::kNotFound);
  }

  TEST_CASE("graph loading with labels") {
    drtest::TempDir dir;
    drtest::write_text(dir / "t.tsv", "q1\tborn_in\tq2\nq2\tcapital_of\tq3\n");
    drtest::write_text(dir / "l.tsv", "q1\tMarie Curie\nq2\tWarsaw\n");
    const auto g = KnowledgeGraph::load(dir / "t.tsv", dir / "l.tsv");
    CHECK(g.size() == 3);
    CHECK(g.label("q1") == "Marie Curie");
    CHECK(g.label("q3") == "q3");
  }

  TEST_CASE("seed sampling honors degree range and stoplist") {
    Rng rng(1);
    auto g = drtest::random_graph(rng, 200, 600);
    SamplerConfig c;
    std::set<std::string> stop{"e0005"};
    for (int i = 0; i < 200; ++i) {
      const auto s = sample_seed(g, stop, rng, c);
      CHECK(g.degree(s) >= 3);
      CHECK(g.degree(s) <= 10);
      CHECK(s != "e0005");
    }
    KnowledgeGraph tiny;
    tiny.add_edge({"a", "r", "b"});
    CHECK(code_of([&] { (void)sample_seed(tiny, {}, rng, c); }) == ErrorCode::kNoEligibleSeed);
  }

  TEST_CASE("subgraph expansion invariants on random graphs") {
    SamplerConfig c;
    c.supernode_threshold = 40;
    std::size_t ok = 0;
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
      Rng rng(seed);
      const auto g = drtest::random_graph(rng, 80 + seed, 200 + 3 * seed);
      try {
        const auto s = sample_seed(g, {}, rng, c);
        const auto sub = expand_subgraph(g, s, rng, c);
        CHECK_MESSAGE(drtest::sampler_violation(g, sub, c).empty(), drtest::sampler_violation(g, sub, c));
        ++ok;
      } catch (const Error& e) {
        CHECK((e.code() == ErrorCode::kGraphTooSmall || e.code() == ErrorCode::kNoEligibleSeed));
      }
    }
    CHECK(ok > 30);
  }

  TEST_CASE("supernodes join as leaves") {
    KnowledgeGraph g;
    for (int i = 0; i < 3; ++i) g.add_edge({"seed", "r", fmt::format("n{}", i)});
    g.add_edge({"seed", "r", "hub"});
    for (int i = 0; i < 50; ++i) g.add_edge({"hub", "r", fmt::format("h{}", i)});
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) g.add_edge({fmt::format("n{}", i), "r", fmt::format("m{}{}", i, j)});
    }
    SamplerConfig c;
    c.supernode_threshold = 20;
    Rng rng(3);
    const auto sub = expand_subgraph(g, "seed", rng, c);
    CHECK(sub.truncated_supernodes == std::set<std::string>{"hub"});
    for (const auto& n : sub.nodes) CHECK((n.rfind("h", 0) != 0 || n == "hub"));
    CHECK(drtest::sampler_violation(g, sub, c).empty());
  }

  TEST_CASE("small components are declared errors") {
    KnowledgeGraph g;
    for (int i = 0; i < 4; ++i) g.add_edge({"s", "r", fmt::format("x{}", i)});
    Rng rng(0);
    CHECK(code_of([&] { (void)expand_subgraph(g, "s", rng); }) == ErrorCode::kGraphTooSmall);
  }

  TEST_CASE("expansion is deterministic per seed") {
    Rng g_rng(9);
    const auto g = drtest::random_graph(g_rng, 150, 500);
    auto run = [&](std::uint64_t s) {
      Rng rng(s);
      const auto seed = sample_seed(g, {}, rng);
      return expand_subgraph(g, seed, rng).nodes;
    };
    CHECK(run(5) == run(5));
  }

  TEST_CASE("triplet verification finds a paragraph naming both ends") {
    KnowledgeGraph g;
    g.add_entity("q1", "Marie Curie");
    g.add_entity("q2", "Warsaw");
    g.add_entity("q9", "Atlantis");
    g.add_edge({"q1", "born in", "q2"});
    auto search = fact_search();
    const auto ok = verify_triplet({"q1", "born in", "q2"}, g, *search);
    CHECK(ok.verified);
    CHECK(ok.fact.citations == std::vector<std::string>{"d1#p1"});
    CHECK_FALSE(verify_triplet({"q1", "born in", "q9"}, g, *search).verified);
  }

  TEST_CASE("question contract and retries") {
    KnowledgeGraph g;
    g.add_entity("q1", "Marie Curie");
    g.add_entity("q2", "Warsaw");
    g.add_entity("q3", "Poland");
    SubgraphSample sample{"q1", {"q1", "q2", "q3"}, {}, {}, {}};
    const Json named{{"question", "Which country has Warsaw as its capital, birthplace of Marie Curie?"},
                     {"answer", "Warsaw"},
                     {"entities", {"q1", "q2", "q3"}}};
    const auto v = question_contract_violations(named, sample, g);
    REQUIRE(v.size() == 1);
    CHECK(v[0] == "question names the answer entity");
    const Json few{{"question", "Where was the discoverer of polonium born?"},
                   {"answer", "Warsaw"},
                   {"entities", {"q1", "q2"}}};
    CHECK(question_contract_violations(few, sample, g).size() == 1);
    const Json good{{"question", "The birthplace of the discoverer of polonium is the capital of which country's "
                                 "neighbour city?"},
                    {"answer", "Poland"},
                    {"entities", {"Marie Curie", "q2", "q3"}}};
    CHECK(question_contract_violations(good, sample, g).empty());

    std::vector<VerifiedFact> facts{{{"q1", "born in", "q2"}, "f1", {"d1#p1"}},
                                    {{"q2", "capital of", "q3"}, "f2", {"d2#p1"}},
                                    {{"q1", "citizen of", "q3"}, "f3", {"d1#p1"}}};
    ScriptedModelClient model(std::vector<std::string>{named.dump(), "```json\n" + good.dump() + "\n```"});
    const auto qa = generate_graph_question(sample, facts, g, model);
    CHECK(qa.attempts == 2);
    CHECK(qa.answer == "Poland");
    CHECK(qa.entities == std::vector<std::string>{"q1", "q2", "q3"});
    CHECK(qa.citations == std::vector<std::string>{"d1#p1", "d2#p1"});

    ScriptedModelClient stubborn(std::vector<std::string>{named.dump(), named.dump(), named.dump()});
    CHECK(code_of([&] { (void)generate_graph_question(sample, facts, g, stubborn); }) ==
          ErrorCode::kContractUnsatisfiable);
    ScriptedModelClient unused(std::vector<std::string>{});
    CHECK(code_of([&] { (void)generate_graph_question(sample, {facts[0]}, g, unused); }) ==
          ErrorCode::kInsufficientFacts);
    CHECK(unused.calls() == 0);
  }

  TEST_CASE("document walk follows model choices") {
    DocCollection docs{{"A", {"A", "alpha text", {"B", "missing"}}},
                       {"B", {"B", "beta text", {"A", "C"}}},
                       {"C", {"C", "gamma text", {"A"}}}};
    ScriptedModelClient model(std::vector<std::string>{R"({"next":"B"})", R"({"next":"C"})"});
    const auto t = doc_walk(docs, "A", 5, model);
    CHECK(t.visited == std::vector<std::string>{"A", "B", "C"});
    CHECK(t.stop == WalkStop::kDeadEnd);
    CHECK(model.requests()[0].messages[0].content.find("- missing") == std::string::npos);

    ScriptedModelClient stopper(std::vector<std::string>{R"({"stop":true})"});
    CHECK(doc_walk(docs, "A", 5, stopper).stop == WalkStop::kModelStop);
    ScriptedModelClient wrong(std::vector<std::string>{R"({"next":"C"})"});
    CHECK(doc_walk(docs, "A", 5, wrong).stop == WalkStop::kInvalidChoice);
    ScriptedModelClient one(std::vector<std::string>{R"({"next":"B"})"});
    const auto capped = doc_walk(docs, "A", 1, one);
    CHECK(capped.stop == WalkStop::kMaxSteps);
    CHECK(capped.visited.size() == 2);

    Rng r1(4), r2(4);
    CHECK(random_walk(docs, "A", 3, r1).visited == random_walk(docs, "A", 3, r2).visited);
  }

  TEST_CASE("walk consolidation needs two documents") {
    DocCollection docs{{"A", {"A", "alpha", {"B"}}}, {"B", {"B", "beta", {}}}};
    ScriptedModelClient model(std::vector<std::string>{
        R"({"question":"q?","answer":"x","documents":["A"]})",
        R"({"question":"q?","answer":"x","documents":["A","B","Z"]})"});
    const auto qa = walk_to_qa(docs, {{"A", "B"}, WalkStop::kDeadEnd}, model);
    CHECK(qa.attempts == 2);
    CHECK(qa.documents == std::vector<std::string>{"A", "B"});
    ScriptedModelClient unused(std::vector<std::string>{});
    CHECK(code_of([&] { (void)walk_to_qa(docs, {{"A"}, WalkStop::kDeadEnd}, unused); }) ==
          ErrorCode::kInsufficientFacts);
  }

  TEST_CASE("final answer extraction") {
    CHECK(extract_final_answer("think <answer> Paris </answer>") == "Paris");
    CHECK(extract_final_answer("reasoning\nAnswer: Rome\nmore") == "Rome");
    CHECK(extract_final_answer("Final answer: Oslo") == "Oslo");
    CHECK(extract_final_answer("  Lima ") == "Lima");
    CHECK(answers_match("<answer>Eiffel  Tower.</answer>", "eiffel tower"));
    CHECK_FALSE(answers_match("<answer></answer>", ""));
  }

  TEST_CASE("difficulty filter") {
    auto solves = [](const std::string&) { return std::string("Answer: Warsaw"); };
    auto misses = [](const std::string&) { return std::string("Answer: Krakow"); };
    auto breaks = [](const std::string&) -> std::string { throw std::runtime_error("offline"); };
    CHECK(difficulty_filter("q", "Warsaw", solves).decision == Difficulty::kDropSimple);
    CHECK(difficulty_filter("q", "Warsaw", misses).decision == Difficulty::kKeep);
    const auto f = difficulty_filter("q", "Warsaw", breaks);
    CHECK(f.decision == Difficulty::kKeep);
    CHECK(f.flagged);
  }

  TEST_CASE("reflection loop outcomes") {
    ScriptedModelClient first(std::vector<std::string>{"Answer: Warsaw"});
    const auto pos = reflection_loop("q", "Warsaw", first);
    CHECK(pos.result == ReflectionResult::kPositive);
    CHECK(pos.rounds == 1);

    ScriptedModelClient second(std::vector<std::string>{
        "Answer: Krakow", "According to the user's hint, my answer was wrong. Curie was born in Warsaw.\nAnswer: Warsaw"});
    const auto refl = reflection_loop("q", "Warsaw", second);
    CHECK(refl.result == ReflectionResult::kReflective);
    CHECK(refl.reflection_turns == 1);
    REQUIRE(refl.transcript.size() == 4);
    CHECK(refl.transcript[2].role == "user");
    CHECK(refl.transcript[3].content.find("hint") == std::string::npos);
    CHECK(refl.transcript[3].content.find("Warsaw") != std::string::npos);
    CHECK(second.requests()[1].messages.size() == 3);

    ScriptedModelClient never(std::vector<std::string>{"Answer: a", "Answer: b", "Answer: c"});
    const auto rej = reflection_loop("q", "Warsaw", never);
    CHECK(rej.result == ReflectionResult::kRejected);
    CHECK(rej.rounds == 3);
    CHECK(rej.reflection_turns == 2);
  }

  TEST_CASE("induced phrase scrubbing is idempotent") {
    const auto p = default_induced_phrase_patterns();
    const std::string in = "First fact. As the user hinted, the year is wrong. Second fact.";
    const auto once = scrub_induced_phrases(in, p);
    CHECK(once.find("hinted") == std::string::npos);
    CHECK(once.find("First fact.") != std::string::npos);
    CHECK(once.find("Second fact.") != std::string::npos);
    CHECK(scrub_induced_phrases(once, p) == once);
    CHECK(code_of([&] { (void)scrub_induced_phrases("x", {"("}); }) == ErrorCode::kInvalidArgument);
  }

  TEST_CASE("verification workflow runs every stage") {
    auto search = fact_search();
    ScriptedModelClient model([](const ModelRequest& req, std::size_t i) -> ModelResponse {
      const auto& prompt = req.messages.back().content;
      auto first_id = [&]() {
        const auto open = prompt.find("Retrieved evidence:\n[");
        if (open == std::string::npos) return std::string{};
        const auto b = open + 21;
        return prompt.substr(b, prompt.find(']', b) - b);
      };
      switch (i) {
        case 0:
          return {R"({"points":[{"claim":"Solar panels convert sunlight","source_span":"s1"},)"
                  R"({"claim":"Hydro power uses water"}]})", std::nullopt};
        case 1:
          return {R"({"steps":[{"point":0,"queries":["solar panels"]},)"
                  R"({"point":1,"queries":["zzzz"],"depends_on":[0]}]})", std::nullopt};
        case 2: return {Json{{"conclusion", "support"}, {"evidence", {first_id(), "bogus"}}}.dump(), std::nullopt};
        case 3: return {R"({"conclusion":"support","evidence":[]})", std::nullopt};
        case 4: return {R"({"queries":["hydro power water"]})", std::nullopt};
        default: return {Json{{"conclusion", "support"}, {"evidence", {first_id()}}}.dump(), std::nullopt};
      }
    });
    const auto r = verification_workflow("material", *search, model);
    REQUIRE(r.completed);
    REQUIRE(r.points.size() == 2);
    CHECK(r.points[0].conclusion == Conclusion::kSupport);
    CHECK(r.points[0].evidence == std::vector<std::string>{"d3#p1"});
    CHECK(r.points[1].conclusion == Conclusion::kSupport);
    CHECK(r.points[1].evidence == std::vector<std::string>{"d4#p1"});
    CHECK(r.points[1].depends_on == std::vector<std::size_t>{0});
    std::vector<std::string> stages;
    for (const auto& t : r.trace) stages.push_back(t.stage);
    CHECK(stages == std::vector<std::string>{"extract", "plan", "verify", "replan", "report"});
    CHECK(r.report.find("\\cite{d3#p1}") != std::string::npos);
    CHECK(synth::to_json(r)["completed"] == true);
  }

  TEST_CASE("verification keeps partial results when a stage fails") {
    auto search = fact_search();
    ScriptedModelClient model(std::vector<std::string>{
        R"({"points":[{"claim":"a"},{"claim":"b"}]})", R"({"steps":[{"point":0,"depends_on":[1]}]})"});
    const auto r = verification_workflow("material", *search, model);
    CHECK_FALSE(r.completed);
    CHECK(r.failed_stage == "plan");
    CHECK(r.points.size() == 2);
    CHECK(r.trace.back().stage == "plan");
    const auto j = synth::to_json(r);
    CHECK(j["failed_stage"] == "plan");
  }

  TEST_CASE("doubtful points without evidence record the queries") {
    auto search = fact_search();
    ScriptedModelClient model(std::vector<std::string>{R"({"points":[{"claim":"unicorns"}]})",
                                                       R"({"steps":[{"point":0,"queries":["qqqq"]}]})",
                                                       R"({"conclusion":"refute"})", R"({"queries":[]})"});
    const auto r = verification_workflow("m", *search, model);
    REQUIRE(r.completed);
    CHECK(r.points[0].conclusion == Conclusion::kDoubtful);
    CHECK(r.points[0].evidence == std::vector<std::string>{"search:qqqq"});
  }

  TEST_CASE("posterior filter accepts only a clear yes") {
    VerificationPoint p{"c", "", Conclusion::kSupport, {"d1#p1"}, {}, {}};
    ScriptedModelClient yes(std::vector<std::string>{R"({"consistent": true})"});
    CHECK(posterior_filter(p, yes));
    ScriptedModelClient plain(std::vector<std::string>{"Yes"});
    CHECK(posterior_filter(p, plain));
    ScriptedModelClient hedge(std::vector<std::string>{"probably yes"});
    CHECK_FALSE(posterior_filter(p, hedge));
    ScriptedModelClient no(std::vector<std::string>{R"({"consistent": false})"});
    CHECK_FALSE(posterior_filter(p, no));
    ScriptedModelClient down([](const ModelRequest&, std::size_t) -> ModelResponse {
      throw Error(ErrorCode::kTransport, "down");
    });
    CHECK_FALSE(posterior_filter(p, down));
    p.conclusion.reset();
    CHECK_FALSE(posterior_filter(p, yes));
  }

  TEST_CASE("rubric structure checks") {
    std::vector<Rubric> rs{{"r1", "Names the capital.", 2.0, RubricRole::kExplicit, "", false},
                           {"r2", "Cites sources. Uses tables.", 1.0, RubricRole::kImplicit, "", false},
                           {"r3", "names the capital", 1.0, RubricRole::kImplicit, "", false},
                           {"r4", "Invents numbers.", 1.0, RubricRole::kNegative, "", false},
                           {"r5", "Compares e.g. costs across regions.", 1.0, RubricRole::kImplicit, "", false},
                           {"r6", "Wrong weight.", 0.0, RubricRole::kExplicit, "", false}};
    const auto v = rubric_structure_violations(rs);
    std::set<std::size_t> idx;
    for (const auto& x : v) idx.insert(x.index);
    CHECK(idx == std::set<std::size_t>{1, 2, 3, 5});
  }

  TEST_CASE("rubric drafting regenerates once then drops violators") {
    const std::string bad =
        R"({"hidden_summary":"s","rubrics":[{"criterion":"One.","weight":1,"role":"explicit"},)"
        R"({"criterion":"Two.","weight":1,"role":"negative"}]})";
    ScriptedModelClient model(std::vector<std::string>{bad, bad});
    const auto out = synthesize_rubrics({"seed"}, model);
    CHECK(out.attempts == 2);
    REQUIRE(out.rubrics.size() == 1);
    CHECK(out.rubrics[0].id == "r1");
    CHECK(out.rejected.size() == 1);
    CHECK(model.requests()[1].messages.back().content.find("rubric 2") != std::string::npos);

    ScriptedModelClient garbage(std::vector<std::string>{"nope", "still nope"});
    CHECK(code_of([&] { (void)synthesize_rubrics({"seed"}, garbage); }) == ErrorCode::kRubricRejected);
  }

  TEST_CASE("role reassessment discards any mismatch") {
    const std::vector<Rubric> rs{{"r1", "A.", 1.0, RubricRole::kExplicit, "", false},
                                 {"r2", "B.", 1.0, RubricRole::kImplicit, "", false},
                                 {"r3", "C.", -1.0, RubricRole::kNegative, "", false}};
    auto reply = [](const std::string& r2role) {
      return Json{{"task_query", "Write a report."},
                  {"reassessment",
                   {{{"id", "r1"}, {"role", "explicit"}},
                    {{"id", "r2"}, {"role", r2role}},
                    {{"id", "r3"}, {"role", "negative"}}}}}
          .dump();
    };
    ScriptedModelClient ok(std::vector<std::string>{reply("implicit")});
    CHECK(synthesize_task("sum", rs, ok).status == SampleStatus::kRetained);
    ScriptedModelClient mismatch(std::vector<std::string>{reply("explicit")});
    const auto s = synthesize_task("sum", rs, mismatch);
    CHECK(s.status == SampleStatus::kDiscardedRoleMismatch);
    CHECK(synth::to_json(s)["status"] == "discarded_role_mismatch");
    ScriptedModelClient missing(std::vector<std::string>{R"({"task_query":"t","reassessment":[]})"});
    CHECK(synthesize_task("sum", rs, missing).status == SampleStatus::kDiscardedMalformed);
    ScriptedModelClient unknown(std::vector<std::string>{reply("bonus")});
    CHECK(synthesize_task("sum", rs, unknown).status == SampleStatus::kDiscardedMalformed);
  }

  TEST_CASE("consistency check") {
    SynthSample s;
    s.hidden_summary = "sum";
    s.task_query = "task";
    ScriptedModelClient high(std::vector<std::string>{R"({"score":0.9,"contradictory":[]})"});
    CHECK(consistency_check(s, high).keep);
    ScriptedModelClient contra(std::vector<std::string>{R"({"score":0.9,"contradictory":["r1"]})"});
    CHECK_FALSE(consistency_check(s, contra).keep);
    ScriptedModelClient low(std::vector<std::string>{R"({"score":0.5})"});
    apply_consistency(s, low);
    CHECK(s.status == SampleStatus::kDiscardedInconsistent);
    CHECK(s.consistency_score == 0.5);
    SynthSample t;
    ScriptedModelClient broken(std::vector<std::string>{R"({"score":2})"});
    apply_consistency(t, broken);
    CHECK(t.status == SampleStatus::kDiscardedInconsistent);
    CHECK_FALSE(t.consistency_score.has_value());
  }

  TEST_CASE("temporal filter fixtures") {
    const auto now = parse_rfc3339("2025-03-01T00:00:00Z");
    const auto fixtures = read_json_file(drtest::fixture("filters/temporal.json"));
    REQUIRE(fixtures.size() >= 2);
    for (const auto& f : fixtures) {
      const auto t = agent::trajectory_from_json(f.at("trajectory"));
      CHECK_MESSAGE(temporal_filter(t, now) == f.at("keep").get<bool>(), f.at("name").get<std::string>());
    }
    CHECK(year_tokens("in 1999 and 2024, not 12345 or 2150") == std::vector<int>{1999, 2024});
  }

  TEST_CASE("temporal filter on built trajectories") {
    const auto now = parse_rfc3339("2025-06-01T00:00:00Z");
    const agent::ToolCall past{"batch_web_surfer", Json{{"queries", {"EV sales 2023"}}}};
    const agent::ToolCall current{"batch_web_surfer", Json{{"queries", {"EV sales 2025"}}}};
    CHECK_FALSE(temporal_filter(traj("What are the latest EV sales?", {past}), now));
    CHECK(temporal_filter(traj("What were EV sales in 2023?", {past}), now));
    CHECK(temporal_filter(traj("What are the latest EV sales?", {current}), now));
  }

  TEST_CASE("language mix filter") {
    CHECK(language_mix_filter("All English prose here.", Script::kLatin, 0.1));
    CHECK_FALSE(language_mix_filter("English mixed with 很多中文字符在这里", Script::kLatin, 0.1));
    CHECK(language_mix_filter("Prose.\n\n```\n中文代码注释中文代码注释\n```\n", Script::kLatin, 0.1));
    CHECK(language_mix_filter("<tool_call>{\"q\":\"中文查询中文查询\"}</tool_call> ok", Script::kLatin, 0.1));
    CHECK(foreign_script_density("12 34", Script::kLatin) == 0.0);
    CHECK(foreign_script_density("ab中文", Script::kCjk) == doctest::Approx(0.5));
  }

  TEST_CASE("n-gram repetition") {
    CHECK(max_ngram_repeats("a b c d a b c d a b c d a b c d", 4) == 3);
    CHECK(max_ngram_repeats("one two three", 4) == 0);
    const auto loop = traj("q", {}, "spam spam spam spam spam spam spam spam");
    const auto fine = traj("q", {}, "a clean varied report with many distinct words");
    CHECK(ngram_dedup({loop, fine}, 4, 3) == std::vector<std::size_t>{1});
  }

  TEST_CASE("shortest correct selection keeps ties") {
    auto mk = [](std::size_t steps, std::string report) {
      agent::Trajectory t;
      t.steps.resize(steps);
      t.final_report = std::move(report);
      return t;
    };
    std::vector<agent::Trajectory> c{mk(4, "Answer: Paris"), mk(2, "Answer: Rome"), mk(3, "Answer: Paris"),
                                     mk(3, "<answer>paris</answer>")};
    CHECK(select_shortest_correct(c, "Paris") == std::vector<std::size_t>{2, 3});
    CHECK(select_shortest_correct(c) == std::vector<std::size_t>{1});
  }

  TEST_CASE("noise classification and retention") {
    CHECK(classify_noise(with_observations({{"s", false}})) == NoiseClass::kClean);
    CHECK(classify_noise(with_observations({{"s", true}, {"s", false}})) == NoiseClass::kRecovered);
    CHECK(classify_noise(with_observations({{"s", true}, {"t", false}})) == NoiseClass::kUnrecovered);
    CHECK(classify_noise(with_observations({{"s", true}, {"s", false}}, false)) == NoiseClass::kUnrecovered);

    std::vector<agent::Trajectory> ts;
    for (int i = 0; i < 9; ++i) ts.push_back(with_observations({{"s", false}}));
    for (int i = 0; i < 5; ++i) ts.push_back(with_observations({{"s", true}, {"s", false}}));
    ts.push_back(with_observations({{"s", true}}));
    Rng rng(1);
    const auto r = retain_noise(ts, 0.1, rng);
    CHECK(r.kept.size() == 10);
    REQUIRE(r.flagged.size() == 1);
    CHECK(r.flagged[0] >= 9);
    CHECK(r.flagged[0] < 14);
    Rng again(1);
    CHECK(retain_noise(ts, 0.1, again).flagged == r.flagged);
    CHECK(code_of([&] { (void)retain_noise(ts, 1.0, rng); }) == ErrorCode::kInvalidArgument);
  }

  TEST_CASE("citation normalization and format filter") {
    const std::vector<agent::Source> src{{"k1", "ref1"}, {"k2", "ref2"}};
    CHECK(normalize_citations("See [k1] and [k1, k2] but [x] stays.", src) ==
          "See \\cite{k1} and \\cite{k1,k2} but [x] stays.");
    auto t = traj("q", {{"batch_web_surfer", Json::object()}}, "Result \\cite{k1}.");
    t.steps[0].observations[0].sources = src;
    CHECK(citation_format_filter(t));
    t.final_report = "Result \\cite{k9}.";
    CHECK_FALSE(citation_format_filter(t));
    t.final_report = "No citations.";
    CHECK_FALSE(citation_format_filter(t));
  }

  TEST_CASE("plan alignment") {
    const auto t = traj("q", {{"batch_web_surfer", Json{{"queries", {"solar capacity germany"}}}},
                              {"batch_web_surfer", Json{{"queries", {"wind capacity germany"}}}}});
    const std::vector<std::string> plan{"batch_web_surfer solar capacity germany",
                                        "batch_web_surfer wind capacity germany"};
    CHECK(plan_alignment_filter(t, plan).keep);
    const std::vector<std::string> reversed{plan[1], plan[0]};
    AlignmentOptions strict;
    strict.step_match = 0.9;
    const auto d = plan_alignment_filter(t, reversed, strict);
    CHECK(d.matched == 1);
    CHECK_FALSE(d.keep);
    CHECK(token_jaccard("", "") == 0.0);
  }

  TEST_CASE("graph pipeline is deterministic and independent of jobs") {
    Rng rng(11);
    const auto g = drtest::random_graph(rng, 120, 400);
    GraphPipelineConfig c;
    c.samples = 12;
    c.seed = 7;
    const auto a = run_graph_pipeline(g, {}, nullptr, nullptr, c);
    c.jobs = 4;
    const auto b = run_graph_pipeline(g, {}, nullptr, nullptr, c);
    CHECK(to_jsonl(a) == to_jsonl(b));
    REQUIRE(a.size() == 12);
    CHECK(a[3]["provenance"]["seed"] == 10);
    CHECK(a[3]["sample_index"] == 3);
  }

  TEST_CASE("rubric pipeline rows carry provenance") {
    const std::string draft =
        R"({"hidden_summary":"s","rubrics":[{"criterion":"One.","weight":1,"role":"explicit"}]})";
    const std::string task = R"({"task_query":"t","reassessment":[{"id":"r1","role":"explicit"}]})";
    ScriptedModelClient model(std::vector<std::string>{draft, task});
    ScriptedModelClient judge(std::vector<std::string>{R"({"score":1.0})"});
    const auto rows = run_rubric_pipeline({"a", "b"}, model, judge, {});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0]["status"] == "retained");
    CHECK(rows[0]["provenance"]["pipeline"] == "rubrics");
  }
}
