#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "config.hpp"
#include "dr/agent/episode.hpp"
#include "dr/error.hpp"
#include "dr/eval/elo.hpp"
#include "dr/eval/judge.hpp"
#include "dr/eval/scoring.hpp"
#include "dr/jsonl.hpp"
#include "dr/model.hpp"
#include "dr/random.hpp"
#include "dr/retrieval/index.hpp"
#include "dr/retrieval/search.hpp"
#include "dr/retrieval/surfer_tool.hpp"
#include "dr/rubric.hpp"
#include "dr/service/review.hpp"
#include "dr/synth/doc_walk.hpp"
#include "dr/synth/filters.hpp"
#include "dr/synth/graph.hpp"
#include "dr/synth/pipeline.hpp"
#include "dr/text.hpp"
#include "dr/toolkit/agent_tools.hpp"
#include "dr/toolkit/offload.hpp"
#include "dr/toolkit/todo.hpp"

namespace fs = std::filesystem;
using dr::Error;
using dr::ErrorCode;
using dr::Json;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> jobs;
  std::string out;
};

drctl::Config effective_config(const Globals& g) {
  drctl::Config c;
  if (!g.config_path.empty()) drctl::load_config(c, g.config_path);
  drctl::apply_env_overrides(c);
  if (g.seed) c.seed = *g.seed;
  if (g.jobs) c.jobs = *g.jobs;
  if (c.jobs < 1) throw Error(ErrorCode::kInvalidArgument, "--jobs must be at least 1");
  return c;
}

std::size_t to_size(std::int64_t v, const char* name) {
  if (v < 0) throw Error(ErrorCode::kInvalidArgument, fmt::format("{} must not be negative", name));
  return static_cast<std::size_t>(v);
}

void emit(const Globals& g, const std::string& content) {
  if (g.out.empty()) {
    std::cout << content;
    std::cout.flush();
  } else {
    if (g.out.find('/') != std::string::npos) fs::create_directories(fs::path(g.out).parent_path());
    dr::write_file_atomic(g.out, content);
  }
}

std::unique_ptr<dr::ModelClient> make_model(const drctl::ModelSettings& m, const std::string& role) {
  if (m.backend == "none") return nullptr;
  if (m.backend == "script") {
    if (m.script.empty()) {
      throw Error(ErrorCode::kInvalidArgument, role + ".script is required for the script backend");
    }
    return dr::load_scripted_client(m.script);
  }
  if (m.backend == "http") {
    dr::HttpModelConfig h;
    h.base_url = m.base_url;
    h.path = m.path;
    h.model = m.model;
    h.api_key_env = m.api_key_env;
    h.timeout = std::chrono::seconds(m.timeout_s);
    return std::make_unique<dr::HttpModelClient>(h);
  }
  throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown {}.backend '{}'", role, m.backend));
}

// Scripted replies are consumed in call order, so parallel workers would make
// the output depend on scheduling.
std::size_t effective_jobs(const drctl::Config& c) {
  if (c.model.backend == "script" || c.judge.backend == "script") return 1;
  return static_cast<std::size_t>(c.jobs);
}

dr::Timestamp config_now(const drctl::Config& c) {
  if (!c.now.empty()) return dr::parse_rfc3339(c.now);
  return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
}

std::shared_ptr<dr::retrieval::SearchService> make_search(const drctl::Config& c, const std::string& index_path) {
  if (index_path.empty()) return nullptr;
  auto index = std::make_shared<dr::retrieval::ParagraphIndex>(
      dr::retrieval::index_from_json(dr::read_json_file(index_path)));
  dr::retrieval::AuthorityList authority;
  authority.boost = c.authority_boost;
  if (!c.authority.empty()) authority = dr::retrieval::AuthorityList::load(c.authority, c.authority_boost);
  auto backend = std::make_shared<dr::retrieval::LocalSearchBackend>(index, authority);
  return std::make_shared<dr::retrieval::SearchService>(backend, to_size(c.search_budget, "search_budget"),
                                                        to_size(c.cache_capacity, "cache_capacity"));
}

std::vector<dr::Rubric> load_rubrics(const std::string& path) {
  const auto j = dr::read_json_file(path);
  const Json& arr = j.is_object() ? j.at("rubrics") : j;
  if (!arr.is_array()) throw Error(ErrorCode::kParse, path + ": expected an array of rubrics");
  std::vector<dr::Rubric> out;
  for (const auto& r : arr) out.push_back(dr::rubric_from_json(r));
  return out;
}

std::vector<dr::agent::Trajectory> load_trajectories(const std::string& path) {
  std::vector<Json> rows;
  if (fs::path(path).extension() == ".json") {
    const auto j = dr::read_json_file(path);
    if (j.is_array()) {
      rows.assign(j.begin(), j.end());
    } else {
      rows.push_back(j);
    }
  } else {
    rows = dr::read_jsonl(path);
  }
  std::vector<dr::agent::Trajectory> out;
  for (const auto& r : rows) out.push_back(dr::agent::trajectory_from_json(r));
  return out;
}

std::vector<std::string> nonblank_lines(const std::string& path) {
  std::vector<std::string> out;
  for (const auto& l : dr::text::split_lines(dr::read_file(path))) {
    auto t = dr::text::trim(l);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

std::string rows_jsonl(const std::vector<Json>& rows) { return dr::to_jsonl(rows); }

std::string escape_message(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out += c;
    }
  }
  return out;
}

void error_line(std::string_view code, std::string_view message) {
  std::cerr << "error: code=" << code << " message=\"" << escape_message(message) << "\"\n";
}

dr::service::ReviewHttpServer* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"drctl: deep-research agent harness"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "TOML config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "master seed for every randomized step");
  app.add_option("--jobs", g.jobs, "worker threads");
  app.add_option("--out", g.out, "output file (stdout when omitted)");

  std::function<int()> action;

  // agent run
  auto* agent = app.add_subcommand("agent", "run research episodes");
  agent->require_subcommand(1);
  auto* agent_run = agent->add_subcommand("run", "run one episode and write its trajectory");
  std::string query, query_file, agent_index;
  agent_run->add_option("--query", query, "research question");
  agent_run->add_option("--query-file", query_file, "file holding the question")->check(CLI::ExistingFile);
  agent_run->add_option("--index", agent_index, "paragraph index for batch_web_surfer");
  agent_run->callback([&] {
    action = [&] {
      const auto c = effective_config(g);
      if (!query_file.empty()) query = dr::read_file(query_file);
      if (dr::text::trim(query).empty()) {
        throw Error(ErrorCode::kInvalidArgument, "--query or --query-file is required");
      }
      auto policy = make_model(c.model, "model");
      if (!policy) throw Error(ErrorCode::kInvalidArgument, "agent run needs a policy: set model.backend");
      dr::agent::ToolRegistry tools;
      if (auto search = make_search(c, agent_index.empty() ? c.index : agent_index)) {
        tools.add(dr::retrieval::make_batch_web_surfer_tool(search));
      }
      const fs::path base = c.workspace.empty() ? fs::current_path() : fs::path(c.workspace);
      const fs::path spill = base / ".drctl-spill";
      if (!c.workspace.empty()) {
        tools.add(dr::toolkit::make_todo_tool(std::make_shared<dr::toolkit::TodoStore>(base / "todo.json")));
        tools.add(dr::toolkit::make_patch_tool(base));
      }
      tools.add(dr::toolkit::make_file_read_tool(base, spill));
      dr::agent::EpisodeConfig ec;
      ec.max_turns = to_size(c.max_turns, "max_turns");
      ec.max_tokens_per_turn = to_size(c.max_tokens_per_turn, "max_tokens_per_turn");
      ec.tool_call_budget = to_size(c.tool_call_budget, "tool_call_budget");
      ec.total_token_budget = to_size(c.total_token_budget, "total_token_budget");
      ec.clock_now = config_now(c);
      ec.parallel_tool_calls = effective_jobs(c) > 1;
      dr::agent::EpisodeHooks hooks;
      hooks.post_process = dr::toolkit::make_offload_hook(std::make_shared<dr::toolkit::Offloader>(
          spill, to_size(c.offload_threshold, "offload_threshold")));
      const auto traj = dr::agent::run_episode(query, ec, *policy, tools, hooks);
      emit(g, dr::agent::to_json(traj).dump(2) + "\n");
      std::cerr << fmt::format("termination={} turns={} tool_calls={} tokens={}\n",
                               dr::agent::to_string(traj.termination), traj.steps.size(),
                               traj.tool_calls_made, traj.tokens_spent);
      return 0;
    };
  });

  // index build
  auto* index = app.add_subcommand("index", "paragraph index management");
  index->require_subcommand(1);
  auto* index_build = index->add_subcommand("build", "build a paragraph index from a corpus");
  std::string corpus;
  index_build->add_option("--corpus", corpus, "directory, .json or .jsonl corpus");
  index_build->callback([&] {
    action = [&] {
      const auto c = effective_config(g);
      const auto path = corpus.empty() ? c.corpus : corpus;
      if (path.empty()) throw Error(ErrorCode::kInvalidArgument, "--corpus is required");
      const auto idx = dr::retrieval::build_index(dr::retrieval::load_corpus(path));
      emit(g, idx.to_json().dump() + "\n");
      std::cerr << fmt::format("indexed {} documents, {} paragraphs\n", idx.documents().size(),
                               idx.paragraphs().size());
      return 0;
    };
  });

  // synth graph | walk | rubrics
  auto* synth = app.add_subcommand("synth", "data synthesis pipelines");
  synth->require_subcommand(1);
  std::optional<std::int64_t> samples;
  auto* synth_graph = synth->add_subcommand("graph", "knowledge-graph question synthesis");
  std::string triples, labels, stoplist, graph_index;
  synth_graph->add_option("--triples", triples, "head<TAB>relation<TAB>tail file")
      ->required()
      ->check(CLI::ExistingFile);
  synth_graph->add_option("--labels", labels, "id<TAB>label file")->check(CLI::ExistingFile);
  synth_graph->add_option("--stoplist", stoplist, "entity ids never used as seeds")->check(CLI::ExistingFile);
  synth_graph->add_option("--index", graph_index, "paragraph index used to verify edges");
  synth_graph->add_option("--samples", samples, "number of samples");
  synth_graph->callback([&] {
    action = [&] {
      const auto c = effective_config(g);
      const auto graph = dr::synth::KnowledgeGraph::load(
          triples, labels.empty() ? std::optional<fs::path>{} : std::optional<fs::path>{labels});
      const auto stop = stoplist.empty() ? std::set<std::string>{} : dr::synth::load_stoplist(stoplist);
      auto search = make_search(c, graph_index.empty() ? c.index : graph_index);
      auto model = make_model(c.model, "model");
      dr::synth::GraphPipelineConfig pc;
      pc.samples = to_size(samples.value_or(c.samples), "samples");
      pc.seed = c.seed;
      pc.sampler.min_seed_degree = to_size(c.min_seed_degree, "min_seed_degree");
      pc.sampler.max_seed_degree = to_size(c.max_seed_degree, "max_seed_degree");
      pc.sampler.min_nodes = to_size(c.min_nodes, "min_nodes");
      pc.sampler.max_nodes = to_size(c.max_nodes, "max_nodes");
      pc.sampler.supernode_threshold = to_size(c.supernode_threshold, "supernode_threshold");
      pc.verify_k = to_size(c.search_k, "k");
      pc.jobs = effective_jobs(c);
      const auto rows = dr::synth::run_graph_pipeline(graph, stop, search.get(), model.get(), pc);
      emit(g, rows_jsonl(rows));
      return 0;
    };
  });

  auto* synth_walk = synth->add_subcommand("walk", "multi-document topology walk synthesis");
  std::string docs_path;
  synth_walk->add_option("--docs", docs_path, "linked documents (JSON Lines)")->required()->check(CLI::ExistingFile);
  synth_walk->add_option("--samples", samples, "number of samples");
  synth_walk->callback([&] {
    action = [&] {
      const auto c = effective_config(g);
      const auto docs = dr::synth::load_linked_docs(docs_path);
      auto model = make_model(c.model, "model");
      dr::synth::WalkPipelineConfig pc;
      pc.samples = to_size(samples.value_or(c.samples), "samples");
      pc.seed = c.seed;
      pc.max_steps = to_size(c.walk_max_steps, "walk_max_steps");
      pc.jobs = effective_jobs(c);
      emit(g, rows_jsonl(dr::synth::run_walk_pipeline(docs, model.get(), pc)));
      return 0;
    };
  });

  auto* synth_rubrics = synth->add_subcommand("rubrics", "reverse rubric synthesis");
  std::string seeds_path;
  synth_rubrics->add_option("--seeds", seeds_path, "seed examples, one per line")->required()->check(CLI::ExistingFile);
  synth_rubrics->add_option("--samples", samples, "number of samples");
  synth_rubrics->callback([&] {
    action = [&] {
      const auto c = effective_config(g);
      auto model = make_model(c.model, "model");
      if (!model) throw Error(ErrorCode::kInvalidArgument, "synth rubrics needs a model: set model.backend");
      auto judge = make_model(c.judge, "judge");
      dr::synth::RubricPipelineConfig pc;
      pc.samples = to_size(samples.value_or(1), "samples");
      pc.seed = c.seed;
      pc.seeds_per_sample = to_size(c.seeds_per_sample, "seeds_per_sample");
      pc.consistency_threshold = c.consistency_threshold;
      pc.jobs = effective_jobs(c);
      const auto rows =
          dr::synth::run_rubric_pipeline(nonblank_lines(seeds_path), *model, judge ? *judge : *model, pc);
      emit(g, rows_jsonl(rows));
      return 0;
    };
  });

  // filter <name>
  auto* filter = app.add_subcommand("filter", "trajectory filters");
  std::string filter_name, filter_in, plan_path, reference, script_name = "latin", filter_now;
  double threshold = 0.1, ratio = 0.1;
  std::size_t ngram_n = 4, max_repeats = 3;
  filter->add_option("name", filter_name,
                     "temporal | language-mix | citation-format | ngram-dedup | shortest-correct | noise | "
                     "plan-alignment")
      ->required();
  filter->add_option("--in", filter_in, "trajectories (.jsonl, or .json object/array)")
      ->required()
      ->check(CLI::ExistingFile);
  filter->add_option("--now", filter_now, "reference time for the temporal filter (RFC 3339)");
  filter->add_option("--script", script_name, "primary script for language-mix: latin | cjk");
  filter->add_option("--threshold", threshold, "foreign-script density threshold");
  filter->add_option("--n", ngram_n, "n-gram length for ngram-dedup");
  filter->add_option("--max-repeats", max_repeats, "largest tolerated n-gram repetition");
  filter->add_option("--reference", reference, "reference answer for shortest-correct");
  filter->add_option("--ratio", ratio, "noise share kept by the noise filter");
  filter->add_option("--plan", plan_path, "plan steps, one per line, for plan-alignment");
  filter->callback([&] {
    action = [&] {
      auto c = effective_config(g);
      const auto ts = load_trajectories(filter_in);
      std::vector<Json> kept;
      auto keep_if = [&](auto pred) {
        for (const auto& t : ts) {
          if (pred(t)) kept.push_back(dr::agent::to_json(t));
        }
      };
      auto keep_indices = [&](const std::vector<std::size_t>& idx) {
        for (auto i : idx) kept.push_back(dr::agent::to_json(ts[i]));
      };
      if (filter_name == "temporal") {
        if (!filter_now.empty()) c.now = filter_now;
        const auto now = config_now(c);
        keep_if([&](const auto& t) { return dr::synth::temporal_filter(t, now); });
      } else if (filter_name == "language-mix") {
        dr::synth::Script primary;
        if (script_name == "latin") {
          primary = dr::synth::Script::kLatin;
        } else if (script_name == "cjk") {
          primary = dr::synth::Script::kCjk;
        } else {
          throw Error(ErrorCode::kInvalidArgument, "--script must be latin or cjk");
        }
        keep_if([&](const auto& t) { return dr::synth::language_mix_filter(t, primary, threshold); });
      } else if (filter_name == "citation-format") {
        keep_if([](const auto& t) { return dr::synth::citation_format_filter(t); });
      } else if (filter_name == "ngram-dedup") {
        keep_indices(dr::synth::ngram_dedup(ts, ngram_n, max_repeats));
      } else if (filter_name == "shortest-correct") {
        keep_indices(reference.empty() ? dr::synth::select_shortest_correct(ts)
                                       : dr::synth::select_shortest_correct(ts, reference));
      } else if (filter_name == "noise") {
        dr::Rng rng(c.seed);
        const auto r = dr::synth::retain_noise(ts, ratio, rng);
        for (auto i : r.kept) {
          auto j = dr::agent::to_json(ts[i]);
          j["noise_flagged"] = std::find(r.flagged.begin(), r.flagged.end(), i) != r.flagged.end();
          kept.push_back(std::move(j));
        }
      } else if (filter_name == "plan-alignment") {
        if (plan_path.empty()) throw Error(ErrorCode::kInvalidArgument, "--plan is required for plan-alignment");
        const auto plan = nonblank_lines(plan_path);
        keep_if([&](const auto& t) { return dr::synth::plan_alignment_filter(t, plan).keep; });
      } else {
        throw Error(ErrorCode::kInvalidArgument, "unknown filter '" + filter_name + "'");
      }
      emit(g, rows_jsonl(kept));
      std::cerr << fmt::format("{}: kept {} of {}\n", filter_name, kept.size(), ts.size());
      return 0;
    };
  });

  // judge
  auto* judge = app.add_subcommand("judge", "rubric judging with trial ensembles");
  std::string report_path, rubrics_path;
  judge->add_option("--report", report_path, "report to judge")->required()->check(CLI::ExistingFile);
  judge->add_option("--rubrics", rubrics_path, "rubric file (JSON)")->required()->check(CLI::ExistingFile);
  judge->callback([&] {
    action = [&] {
      const auto c = effective_config(g);
      const auto rubrics = load_rubrics(rubrics_path);
      auto model = make_model(c.judge, "judge");
      if (!model) throw Error(ErrorCode::kInvalidArgument, "judge needs a model: set judge.backend");
      dr::eval::JudgeOptions jo;
      jo.trials = to_size(c.judge_trials, "trials");
      jo.retries = to_size(c.judge_retries, "retries");
      const auto ens = dr::eval::judge_report(dr::read_file(report_path), rubrics, *model, jo, effective_jobs(c));
      Json arr = Json::array();
      for (const auto& e : ens) arr.push_back(dr::eval::to_json(e));
      emit(g, arr.dump(2) + "\n");
      return 0;
    };
  });

  // score
  auto* score = app.add_subcommand("score", "weighted report score with fatal override and tier");
  std::string judgments_path, system_name = "-", category = "-", format = "json";
  score->add_option("--judgments", judgments_path, "ensembles written by `judge`")->required()->check(CLI::ExistingFile);
  score->add_option("--rubrics", rubrics_path, "rubric file (JSON)")->required()->check(CLI::ExistingFile);
  score->add_option("--system", system_name, "system label for the export");
  score->add_option("--category", category, "category label for the export");
  score->add_option("--format", format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  score->callback([&] {
    action = [&] {
      (void)effective_config(g);
      const auto rubrics = load_rubrics(rubrics_path);
      std::vector<dr::eval::EnsembleScore> ens;
      for (const auto& j : dr::read_json_file(judgments_path)) ens.push_back(dr::eval::ensemble_from_json(j));
      const auto r = dr::eval::score_report(rubrics, ens);
      if (format == "csv") {
        emit(g, dr::eval::score_csv({{system_name, category, r.score}}));
        return 0;
      }
      Json tier = nullptr;
      try {
        tier = dr::eval::tier_assign(r.score, dr::eval::default_tiers());
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kOutOfRange) throw;
      }
      emit(g, Json{{"system", system_name},
                   {"category", category},
                   {"raw", r.raw},
                   {"score", r.score},
                   {"fatal_triggered", r.fatal_triggered},
                   {"unevaluable", r.unevaluable},
                   {"tier", tier}}
                      .dump(2) +
                  "\n");
      return 0;
    };
  });

  // elo replay
  auto* elo = app.add_subcommand("elo", "Elo ratings from pairwise records");
  elo->require_subcommand(1);
  auto* elo_replay = elo->add_subcommand("replay", "replay a record log into a leaderboard");
  std::string log_path;
  std::vector<std::string> systems;
  double k_factor = dr::eval::kDefaultK;
  elo_replay->add_option("--log", log_path, "PairwiseRecord JSON Lines")->required()->check(CLI::ExistingFile);
  elo_replay->add_option("--systems", systems, "systems listed even without records")->delimiter(',');
  elo_replay->add_option("--k", k_factor, "K factor");
  std::string elo_format = "csv";
  elo_replay->add_option("--format", elo_format, "csv | json")->check(CLI::IsMember({"json", "csv"}));
  elo_replay->callback([&] {
    action = [&] {
      (void)effective_config(g);
      std::vector<dr::eval::PairwiseRecord> records;
      for (const auto& row : dr::read_jsonl(log_path)) records.push_back(dr::eval::record_from_json(row));
      const auto board = dr::eval::leaderboard(systems, records, k_factor);
      if (elo_format == "json") {
        Json arr = Json::array();
        for (const auto& r : board) arr.push_back(dr::eval::to_json(r));
        emit(g, arr.dump(2) + "\n");
      } else {
        emit(g, dr::eval::leaderboard_csv(board));
      }
      return 0;
    };
  });

  // serve
  auto* serve = app.add_subcommand("serve", "blind pairwise review service");
  std::string listen, data_dir, static_dir, tokens;
  serve->add_option("--listen", listen, "host:port");
  serve->add_option("--data-dir", data_dir, "session storage directory");
  serve->add_option("--static", static_dir, "frontend assets served at /");
  serve->add_option("--tokens", tokens, "reviewer token file");
  serve->callback([&] {
    action = [&] {
      const auto c = effective_config(g);
      dr::service::HttpOptions ho;
      ho.host = c.host;
      ho.port = static_cast<int>(c.port);
      if (!listen.empty()) {
        const auto colon = listen.rfind(':');
        if (colon == std::string::npos) throw Error(ErrorCode::kInvalidArgument, "--listen expects host:port");
        ho.host = listen.substr(0, colon);
        try {
          ho.port = std::stoi(listen.substr(colon + 1));
        } catch (const std::exception&) {
          throw Error(ErrorCode::kInvalidArgument, "--listen expects host:port");
        }
      }
      ho.static_dir = static_dir.empty() ? c.static_dir : static_dir;
      const auto token_file = tokens.empty() ? c.tokens : tokens;
      if (!token_file.empty()) ho.reviewer_tokens = dr::service::load_reviewer_tokens(token_file);
      dr::service::ServiceOptions so;
      so.lease_duration = std::chrono::minutes(c.lease_minutes);
      dr::service::ReviewService service(data_dir.empty() ? c.data_dir : data_dir, so);
      dr::service::ReviewHttpServer server(service, ho);
      const int port = server.bind();
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << fmt::format("listening on http://{}:{}", ho.host, port) << std::endl;
      server.listen();
      g_server = nullptr;
      return 0;
    };
  });

  // config
  auto* config = app.add_subcommand("config", "print the effective configuration as TOML");
  config->callback([&] {
    action = [&] {
      std::string section, out;
      for (const auto& [key, value] : drctl::rendered(effective_config(g))) {
        const auto dot = key.find('.');
        if (key.substr(0, dot) != section) {
          section = key.substr(0, dot);
          out += (out.empty() ? "" : "\n") + fmt::format("[{}]\n", section);
        }
        out += fmt::format("{} = {}\n", key.substr(dot + 1), value);
      }
      emit(g, out);
      return 0;
    };
  });

  if (argc > 1 && argv[1][0] != '-') {
    bool known = false;
    for (const auto* sub : app.get_subcommands({})) known = known || sub->check_name(argv[1]);
    if (!known) {
      std::cerr << app.help();
      error_line("usage", fmt::format("unknown subcommand '{}'", argv[1]));
      return 2;
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << app.help();
    error_line("usage", e.what());
    return 2;
  }

  try {
    return action ? action() : 2;
  } catch (const Error& e) {
    error_line(dr::error_code_name(e.code()), e.what());
  } catch (const std::exception& e) {
    error_line("internal", e.what());
  }
  return 1;
}
