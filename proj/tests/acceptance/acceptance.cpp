// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "dr/agent/citations.hpp"
#include "dr/agent/episode.hpp"
#include "dr/agent/turn_parser.hpp"
#include "dr/error.hpp"
#include "dr/eval/elo.hpp"
#include "dr/eval/judge.hpp"
#include "dr/jsonl.hpp"
#include "dr/model.hpp"
#include "dr/random.hpp"
#include "dr/retrieval/index.hpp"
#include "dr/retrieval/search.hpp"
#include "dr/retrieval/surfer_tool.hpp"
#include "dr/reward/reward.hpp"
#include "dr/synth/filters.hpp"
#include "dr/synth/graph.hpp"
#include "dr/synth/rubric_synth.hpp"
#include "dr/text.hpp"
#include "dr/time.hpp"
#include "dr/toolkit/agent_tools.hpp"
#include "dr/toolkit/offload.hpp"
#include "dr/toolkit/patch.hpp"
#include "dr/toolkit/todo.hpp"
#include "graph_gen.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace dr;
using SteadyClock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects the first failure; later checks still run so the detail stays useful.
struct Checker {
  Outcome out;
  std::size_t checks = 0;
  void expect(bool ok, const std::string& what) {
    ++checks;
    if (!ok && out.pass) {
      out.pass = false;
      out.detail = what;
    }
  }
};

struct Criterion {
  std::string name;
  double time_limit_s;  // 0: no limit
  std::function<Outcome()> run;
};

// ---------------------------------------------------------------------------

Outcome strict_mapping() {
  Checker c;
  struct Row {
    Verdict v;
    RubricRole role;
    int want;
  };
  const Row table[] = {
      {Verdict::kFullySatisfied, RubricRole::kExplicit, 1}, {Verdict::kPartiallySatisfied, RubricRole::kExplicit, 0},
      {Verdict::kNotSatisfied, RubricRole::kExplicit, 0},   {Verdict::kFullySatisfied, RubricRole::kNegative, 1},
      {Verdict::kPartiallySatisfied, RubricRole::kNegative, 1}, {Verdict::kNotSatisfied, RubricRole::kNegative, 0},
  };
  for (const auto& r : table) {
    c.expect(reward::strict_map(r.v, r.role) == r.want,
             fmt::format("strict_map({}, {}) != {}", to_string(r.v), to_string(r.role), r.want));
  }
  // Implicit rubrics share the positive column.
  for (const auto& r : table) {
    if (r.role != RubricRole::kExplicit) continue;
    c.expect(reward::strict_map(r.v, RubricRole::kImplicit) == r.want, "implicit differs from explicit");
  }
  c.out.detail = c.out.pass ? "6/6 cases" : c.out.detail;
  return c.out;
}

Outcome gae_oracle() {
  Checker c;
  Rng rng(20240601);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto t = drtest::random_trace(rng, 64);
    const auto got = reward::gae_advantages(t);
    const auto want = drtest::brute_force_gae(t);
    c.expect(got.size() == want.size(), "length mismatch");
    for (std::size_t k = 0; k < got.size() && k < want.size(); ++k) worst = std::max(worst, std::abs(got[k] - want[k]));
  }
  c.expect(worst <= 1e-9, fmt::format("max |error| {:.3e} > 1e-9", worst));
  double worst_tel = 0.0;
  for (int i = 0; i < 1000; ++i) {
    auto t = drtest::random_trace(rng, 64);
    t.gamma = t.lambda = 1.0;
    const auto a = reward::gae_advantages(t);
    const std::size_t n = t.rewards.size();
    for (std::size_t s = 0; s < n; ++s) {
      double tail = 0.0;
      for (std::size_t k = s; k < n; ++k) tail += t.rewards[k];
      worst_tel = std::max(worst_tel, std::abs(a[s] - (tail + t.values[n] - t.values[s])));
    }
  }
  c.expect(worst_tel <= 1e-9, fmt::format("telescoping error {:.3e}", worst_tel));
  if (c.out.pass) c.out.detail = fmt::format("1000 traces, max err {:.1e}; telescoping max err {:.1e}", worst, worst_tel);
  return c.out;
}

Outcome ppo_objective() {
  Checker c;
  c.expect(reward::ppo_clipped_objective({1.5}, {1.0}, 0.2) == 1.2, "worked value 1.2");
  c.expect(reward::ppo_clipped_objective({0.5}, {-1.0}, 0.2) == -0.8, "worked value -0.8");
  Rng rng(77);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto b = drtest::random_batch(rng);
    worst = std::max(worst, std::abs(reward::ppo_clipped_objective(b) - drtest::direct_ppo(b)));
  }
  c.expect(worst <= 1e-12, fmt::format("max |error| {:.3e} > 1e-12", worst));
  if (c.out.pass) c.out.detail = fmt::format("worked values exact; 1000 batches, max err {:.1e}", worst);
  return c.out;
}

Outcome ensemble_lattice() {
  Checker c;
  const Rubric rubric{"r1", "Gives the answer.", 1.0, RubricRole::kExplicit, "", false};
  const char* labels[] = {"not_satisfied", "partially_satisfied", "fully_satisfied"};
  const double values[] = {0.0, 0.5, 1.0};
  auto on_lattice = [](double m) { return std::abs(m * 6.0 - std::round(m * 6.0)) <= 1e-12 && m >= 0 && m <= 1; };
  std::size_t ensembles = 0;
  // Every combination of three valid trials, in three reply formats.
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      for (int d = 0; d < 3; ++d) {
        const std::vector<std::string> replies{fmt::format(R"({{"verdict": "{}"}})", labels[a]),
                                               fmt::format(R"({{"score": {}}})", values[b]),
                                               fmt::format("Reasoning first.\n{}", labels[d])};
        ScriptedModelClient judge(replies);
        const auto e = eval::judge_rubric_ensemble("report", rubric, judge);
        ++ensembles;
        c.expect(e.invalid_trials() == 0, "unexpected invalid trial");
        c.expect(on_lattice(e.mean), fmt::format("mean {} not a multiple of 1/6", e.mean));
        c.expect(e.mean == (values[a] + values[b] + values[d]) / 3.0, "mean differs from the trial average");
      }
    }
  }
  // Random complete ensembles.
  Rng rng(6);
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::string> replies;
    for (int t = 0; t < 3; ++t) replies.push_back(fmt::format(R"({{"score": {}}})", values[uniform_index(rng, 3)]));
    ScriptedModelClient judge(replies);
    const auto e = eval::judge_rubric_ensemble("report", rubric, judge);
    ++ensembles;
    c.expect(on_lattice(e.mean), fmt::format("mean {} not a multiple of 1/6", e.mean));
  }
  ScriptedModelClient example(std::vector<std::string>{R"({"score": 1})", R"({"score": 0.5})", R"({"score": 0})"});
  c.expect(eval::judge_rubric_ensemble("report", rubric, example).mean == 0.5, "(1, 0.5, 0) != 0.5");
  if (c.out.pass) {
    c.out.detail = fmt::format(
        "{} three-trial ensembles on k/6; (1,0.5,0) -> 0.5 exact. Scope: an ensemble with one invalid "
        "trial averages the two valid trials and is not on the k/6 grid",
        ensembles);
  }
  return c.out;
}

Outcome sampler_constraints() {
  Checker c;
  synth::SamplerConfig cfg;  // seed degree [3,10], nodes [10,40]
  cfg.supernode_threshold = 40;
  std::size_t valid = 0, declared = 0, leaves = 0;
  for (std::uint64_t s = 0; s < 500; ++s) {
    Rng rng(1000 + s);
    const auto n = 60 + uniform_index(rng, 140);
    const auto g = drtest::random_graph(rng, n, n * (2 + uniform_index(rng, 3)), 1 + uniform_index(rng, 3));
    try {
      const auto seed = synth::sample_seed(g, {}, rng, cfg);
      const auto sub = synth::expand_subgraph(g, seed, rng, cfg);
      const auto why = drtest::sampler_violation(g, sub, cfg);
      c.expect(why.empty(), fmt::format("sample {}: {}", s, why));
      leaves += sub.truncated_supernodes.size();
      ++valid;
    } catch (const Error& e) {
      const bool ok = e.code() == ErrorCode::kGraphTooSmall || e.code() == ErrorCode::kNoEligibleSeed;
      c.expect(ok, fmt::format("sample {}: undeclared error {}", s, e.what()));
      ++declared;
    }
  }
  c.expect(valid >= 250, fmt::format("only {} samples produced a subgraph", valid));
  if (c.out.pass) {
    c.out.detail = fmt::format("500 samples: {} valid, {} declared errors, {} supernode leaves checked", valid,
                               declared, leaves);
  }
  return c.out;
}

Outcome protocol_arithmetic() {
  Checker c;
  std::vector<std::string> systems, queries;
  for (int i = 0; i < 6; ++i) systems.push_back(fmt::format("sys{}", i));
  for (int q = 0; q < 10; ++q) queries.push_back(fmt::format("q{}", q));
  const auto rr = eval::schedule_pairings(systems, queries, eval::PairingMode::kRoundRobin, {}, 3);
  const auto ovr = eval::schedule_pairings(systems, queries, eval::PairingMode::kOneVsRest, "sys0", 3);
  c.expect(rr.size() == 150, fmt::format("round robin {} != 150", rr.size()));
  c.expect(ovr.size() == 50, fmt::format("one vs rest {} != 50", ovr.size()));
  std::set<std::string> ids;
  for (const auto& p : rr) ids.insert(p.pair_id);
  c.expect(ids.size() == rr.size(), "pair ids not unique");
  if (c.out.pass) c.out.detail = "round_robin(6,10)=150, one_vs_rest(1+5,10)=50";
  return c.out;
}

eval::PairwiseRecord random_record(Rng& rng, const std::vector<std::string>& systems, std::size_t i) {
  const auto a = uniform_index(rng, systems.size());
  auto b = uniform_index(rng, systems.size() - 1);
  if (b >= a) ++b;
  eval::PairwiseRecord r;
  r.pair_id = fmt::format("p{:05}", i);
  r.query_id = fmt::format("q{}", i % 13);
  r.left_system = systems[a];
  r.right_system = systems[b];
  r.verdict = static_cast<eval::PairVerdict>(uniform_index(rng, 5));
  r.timestamp = parse_rfc3339("2025-01-01T00:00:00Z") + std::chrono::seconds(i);
  return r;
}

Outcome elo_properties() {
  Checker c;
  const std::vector<std::string> systems{"a", "b", "c", "d", "e", "f", "g", "h"};
  Rng rng(31337);
  eval::EloTable table;
  std::vector<eval::PairwiseRecord> records;
  for (std::size_t i = 0; i < 10000; ++i) {
    records.push_back(random_record(rng, systems, i));
    table.apply(records.back());
  }
  double sum = 0.0;
  for (const auto& s : systems) sum += table.rating(s);
  c.expect(sum == 1500.0 * systems.size(), fmt::format("rating sum drifted to {:.17g}", sum));

  eval::EloTable pair;
  eval::PairwiseRecord win;
  win.pair_id = "p1";
  win.left_system = "x";
  win.right_system = "y";
  win.verdict = eval::PairVerdict::kLeftBetter;
  pair.apply(win);
  c.expect(std::abs(pair.rating("x") - 1516.0) <= 1e-9 && std::abs(pair.rating("y") - 1484.0) <= 1e-9,
           fmt::format("equal-rating win gave {}/{}", pair.rating("x"), pair.rating("y")));

  const auto board = eval::leaderboard(systems, records);
  auto shuffled = records;
  shuffle(shuffled, rng);
  c.expect(eval::leaderboard(systems, shuffled) == board, "replay depends on log order");
  c.expect(eval::leaderboard(systems, records) == board, "replay not repeatable");
  for (const auto& row : board) {
    c.expect(row.rating == table.rating(row.system), "replay differs from incremental updates");
  }

  std::vector<eval::PairwiseRecord> fixture;
  for (const auto& row : read_jsonl(drtest::fixture("elo/records.jsonl"))) fixture.push_back(eval::record_from_json(row));
  c.expect(eval::leaderboard_csv(eval::leaderboard({}, fixture)) ==
               drtest::read_text(drtest::fixture("elo/expected_leaderboard.csv")),
           "fixture replay differs from the independently computed leaderboard");
  if (c.out.pass) c.out.detail = "10000 updates, sum exact; 1516/1484; order-independent replay; fixture CSV matches";
  return c.out;
}

std::shared_ptr<agent::Tool> echo_tool() {
  return std::make_shared<agent::FunctionTool>("echo", "echo", [](const Json& a) {
    return agent::ToolResult{a.value("text", std::string{}), false, false, {}};
  });
}

// A policy that tries hard to break budgets: many calls per turn, oversized
// token counts, malformed blocks and long reports.
ModelResponse adversarial_turn(Rng& rng) {
  std::string text;
  const auto kind = uniform_index(rng, 10);
  if (kind == 0) {
    text = "<tool_call>{broken";
  } else if (kind == 1) {
    text = std::string(200 + uniform_index(rng, 4000), 'r');
  } else {
    const auto calls = uniform_index(rng, 12);
    for (std::size_t i = 0; i < calls; ++i) {
      text += agent::format_tool_call({"echo", Json{{"text", fmt::format("c{}", i)}}});
    }
    if (calls == 0) text = "Final report.";
  }
  std::optional<std::size_t> tokens;
  switch (uniform_index(rng, 4)) {
    case 0: tokens = uniform_index(rng, 100); break;
    case 1: tokens = 16000 + uniform_index(rng, 800); break;
    case 2: tokens = 16384 + uniform_index(rng, 100000); break;
    default: break;
  }
  return {text, tokens};
}

Outcome budget_enforcement() {
  Checker c;
  std::size_t by_reason[5] = {};
  for (std::uint64_t s = 0; s < 1000; ++s) {
    Rng rng(9000 + s);
    agent::EpisodeConfig cfg;  // 30 turns, 16384 tokens per turn
    cfg.tool_call_budget = 1 + uniform_index(rng, 400);
    cfg.total_token_budget = uniform_index(rng, 2) ? 30 * 16384 : 1000 + uniform_index(rng, 100000);
    cfg.clock_now = parse_rfc3339("2025-01-01T00:00:00Z");
    cfg.retry_backoff = std::chrono::milliseconds(0);
    cfg.parallel_tool_calls = false;
    const auto never_report = uniform_index(rng, 2) == 0;
    ScriptedModelClient policy([&rng, never_report](const ModelRequest&, std::size_t) {
      auto r = adversarial_turn(rng);
      if (never_report && r.text == "Final report.") r.text = agent::format_tool_call({"echo", Json{{"text", "x"}}});
      return r;
    });
    agent::ToolRegistry tools;
    tools.add(echo_tool());
    const auto t = agent::run_episode("adversarial", cfg, policy, tools);
    ++by_reason[static_cast<int>(t.termination)];
    c.expect(t.steps.size() <= cfg.max_turns, fmt::format("script {}: {} turns", s, t.steps.size()));
    c.expect(t.tool_calls_made <= cfg.tool_call_budget,
             fmt::format("script {}: {} tool calls > {}", s, t.tool_calls_made, cfg.tool_call_budget));
    c.expect(t.total_tool_calls() <= cfg.tool_call_budget, fmt::format("script {}: executed calls over budget", s));
    c.expect(t.tokens_spent <= cfg.total_token_budget, fmt::format("script {}: {} tokens", s, t.tokens_spent));
    for (const auto& step : t.steps) {
      if (step.action) {
        c.expect(step.action->token_count <= cfg.max_tokens_per_turn,
                 fmt::format("script {}: turn of {} tokens", s, step.action->token_count));
      }
      c.expect(step.output.size() <= cfg.max_tokens_per_turn * 4, fmt::format("script {}: oversized output", s));
    }
  }
  if (c.out.pass) {
    c.out.detail = fmt::format("1000 scripts; report {}, turn {}, token {}, tool {}, error {}", by_reason[0],
                               by_reason[1], by_reason[2], by_reason[3], by_reason[4]);
  }
  return c.out;
}

std::string random_word(Rng& rng) {
  static const char* words[] = {"alpha", "beta", "gamma", "delta", "value", "count", "index", "total", "left",
                                "right", "node", "edge", "weight", "score", "ratio", "limit", "cache", "entry"};
  return words[uniform_index(rng, std::size(words))];
}

// Line i is unique through its numeric tag.
std::string synthetic_line(Rng& rng, std::size_t i) {
  std::string line = fmt::format("let v{} = {}({}, {});", i, random_word(rng), random_word(rng), uniform_index(rng, 1000));
  if (uniform_index(rng, 4) == 0) line = "    " + line;
  return line;
}

std::string join_lines(const std::vector<std::string>& lines, std::size_t from, std::size_t to) {
  std::string out;
  for (std::size_t i = from; i < to; ++i) out += lines[i] + (i + 1 < to ? "\n" : "");
  return out;
}

Outcome patch_editor() {
  Checker c;
  drtest::TempDir dir;
  const auto file = dir / "edit.txt";
  Rng rng(4242);
  double ratio_sum = 0.0;
  std::size_t fuzzy = 0;
  for (std::size_t round = 0; round < 1000; ++round) {
    const std::size_t n = 20 + uniform_index(rng, 481);
    std::vector<std::string> lines;
    for (std::size_t i = 0; i < n; ++i) lines.push_back(synthetic_line(rng, i));
    const std::string original = join_lines(lines, 0, n) + "\n";
    drtest::write_text(file, original);

    const auto from = uniform_index(rng, n - 2);
    const auto to = from + 1 + uniform_index(rng, 3);
    const auto anchor = join_lines(lines, from, std::min(to, n));
    std::vector<std::string> repl_lines;
    const auto repl_n = 1 + uniform_index(rng, 3);
    for (std::size_t k = 0; k < repl_n; ++k) {
      repl_lines.push_back(fmt::format("edited{}_{} = {}({});", round, k, random_word(rng), uniform_index(rng, 99)));
    }
    const auto replacement = join_lines(repl_lines, 0, repl_n);
    std::vector<std::string> expected_lines(lines.begin(), lines.begin() + static_cast<long>(from));
    expected_lines.insert(expected_lines.end(), repl_lines.begin(), repl_lines.end());
    expected_lines.insert(expected_lines.end(), lines.begin() + static_cast<long>(std::min(to, n)), lines.end());
    const std::string expected = join_lines(expected_lines, 0, expected_lines.size()) + "\n";

    // A third of the anchors drift in whitespace and go through the fuzzy path.
    std::string sent_anchor = anchor;
    if (round % 3 == 0) {
      std::string drift;
      for (char ch : anchor) drift += (ch == ' ') ? std::string("  ") : std::string(1, ch);
      sent_anchor = drift;
    }
    try {
      const auto r = toolkit::apply_patch({file, sent_anchor, replacement, 0.85});
      if (r.match_kind == toolkit::MatchKind::kFuzzy) ++fuzzy;
      c.expect(drtest::read_text(file) == expected, fmt::format("round {}: edited file differs", round));
      // Undo restores the original bytes.
      toolkit::apply_patch({file, replacement, anchor, 0.85});
      c.expect(drtest::read_text(file) == original, fmt::format("round {}: round trip differs", round));
    } catch (const Error& e) {
      c.expect(false, fmt::format("round {}: {}", round, e.what()));
    }
    ratio_sum += static_cast<double>(toolkit::patch_payload_bytes({file, anchor, replacement, 0.85})) /
                 static_cast<double>(expected.size());
  }

  // Ambiguous and unmatched anchors leave the file byte-identical.
  std::size_t ambiguous = 0, unmatched = 0;
  for (std::size_t round = 0; round < 200; ++round) {
    std::vector<std::string> lines;
    for (std::size_t i = 0; i < 40; ++i) lines.push_back(synthetic_line(rng, i));
    const auto dup = uniform_index(rng, 20);
    lines[dup + 20] = lines[dup];
    const std::string body = join_lines(lines, 0, lines.size()) + "\n";
    drtest::write_text(file, body);
    try {
      toolkit::apply_patch({file, lines[dup], "replacement text", 0.85});
      c.expect(false, "duplicate anchor accepted");
    } catch (const Error& e) {
      c.expect(e.code() == ErrorCode::kAmbiguous, fmt::format("ambiguous anchor gave {}", e.what()));
      ++ambiguous;
    }
    c.expect(drtest::read_text(file) == body, "ambiguous patch modified the file");
    try {
      toolkit::apply_patch({file, fmt::format("zzqx {} wvut {} plmk", round, uniform_index(rng, 1 << 20)), "x", 0.85});
      c.expect(false, "unmatched anchor accepted");
    } catch (const Error& e) {
      c.expect(e.code() == ErrorCode::kNoMatch, fmt::format("unmatched anchor gave {}", e.what()));
      ++unmatched;
    }
    c.expect(drtest::read_text(file) == body, "unmatched patch modified the file");
  }

  // Payload against a full rewrite on a 500-line file.
  double corpus_ratio = 0.0;
  {
    std::vector<std::string> lines;
    for (std::size_t i = 0; i < 500; ++i) lines.push_back(synthetic_line(rng, i));
    drtest::write_text(file, join_lines(lines, 0, 500) + "\n");
    for (std::size_t k = 0; k < 200; ++k) {
      // Same-size edits keep the file at 500 lines.
      const auto span = 1 + uniform_index(rng, 2);
      const auto at = uniform_index(rng, lines.size() - span + 1);
      const auto anchor = join_lines(lines, at, at + span);
      std::vector<std::string> repl;
      for (std::size_t j = 0; j < span; ++j) repl.push_back(fmt::format("patched{}_{} = {};", k, j, uniform_index(rng, 1000)));
      const auto replacement = join_lines(repl, 0, span);
      toolkit::apply_patch({file, anchor, replacement, 0.85});
      std::copy(repl.begin(), repl.end(), lines.begin() + static_cast<long>(at));
      const auto after = drtest::read_text(file);
      c.expect(after == join_lines(lines, 0, lines.size()) + "\n", fmt::format("corpus edit {} corrupted the file", k));
      corpus_ratio += static_cast<double>(anchor.size() + replacement.size()) / static_cast<double>(after.size());
    }
    corpus_ratio /= 200.0;
  }
  c.expect(corpus_ratio < 0.30, fmt::format("mean payload ratio {:.3f} >= 0.30", corpus_ratio));
  if (c.out.pass) {
    c.out.detail = fmt::format(
        "1000 round trips ({} fuzzy), {} ambiguous + {} no-match untouched; mean payload {:.4f}x rewrite "
        "(500-line corpus), {:.4f}x (mixed sizes)",
        fuzzy, ambiguous, unmatched, corpus_ratio, ratio_sum / 1000.0);
  }
  return c.out;
}

Outcome offload_round_trip() {
  Checker c;
  drtest::TempDir dir;
  toolkit::Offloader off(dir / "spill");
  Rng rng(555);
  std::size_t spilled = 0, total_bytes = 0;
  for (int i = 0; i < 200; ++i) {
    // Log-uniform sizes from 1 byte to 1 MiB.
    const auto size = static_cast<std::size_t>(std::exp(drtest::uniform(rng, 0.0, std::log(1024.0 * 1024.0))));
    std::string payload(size, '\0');
    for (auto& ch : payload) ch = static_cast<char>(uniform_index(rng, 256));
    total_bytes += size;
    const auto out = off.offload(payload);
    if (const auto* in = std::get_if<toolkit::InlinePayload>(&out)) {
      c.expect(in->payload == payload, fmt::format("payload {}: inline copy differs", i));
      c.expect(size <= off.threshold(), "oversized payload kept inline");
      continue;
    }
    const auto& rec = std::get<toolkit::OffloadRecord>(out);
    ++spilled;
    c.expect(rec.original_length == size, "recorded length differs");
    const auto page = 1 + uniform_index(rng, 200000);
    std::string back;
    for (std::size_t at = 0;; at += page) {
      auto chunk = toolkit::read_page(rec.spill_path, at, page);
      if (chunk.empty()) break;
      back += chunk;
    }
    c.expect(back == payload, fmt::format("payload {}: paged read-back differs", i));
  }
  if (c.out.pass) {
    c.out.detail = fmt::format("200 payloads ({:.1f} MiB), {} spilled and paged back byte-exact",
                               static_cast<double>(total_bytes) / (1024.0 * 1024.0), spilled);
  }
  return c.out;
}

class CountingBackend : public retrieval::SearchBackend {
 public:
  std::vector<retrieval::SearchHit> search(const std::string& q, const retrieval::SearchParams&) override {
    ++calls;
    return {{q + "#p1", q, "site.example", q, 1.0, false, 1}};
  }
  std::size_t calls = 0;
};

// Surface variants of a canonical lowercase, single-spaced query.
std::string variant(Rng& rng, const std::string& canonical) {
  std::string out = uniform_index(rng, 2) ? "  " : "";
  for (char ch : canonical) {
    if (ch == ' ') {
      out += uniform_index(rng, 2) ? " " : (uniform_index(rng, 2) ? "\t " : "   ");
    } else {
      out += uniform_index(rng, 3) == 0 ? static_cast<char>(std::toupper(static_cast<unsigned char>(ch))) : ch;
    }
  }
  if (uniform_index(rng, 2)) out += " \n";
  return out;
}

Outcome cache_accounting() {
  Checker c;
  Rng rng(808);
  std::vector<std::string> vocab;
  for (int i = 0; i < 60; ++i) vocab.push_back(fmt::format("{} {} {}", random_word(rng), random_word(rng), i));
  std::size_t total_queries = 0;
  for (int seq = 0; seq < 100; ++seq) {
    CountingBackend backend;
    retrieval::QueryCache cache(4096);
    retrieval::SearchBudget budget(100000);
    std::set<std::string> distinct;
    const auto len = 1 + uniform_index(rng, 400);
    for (std::size_t k = 0; k < len; ++k) {
      const auto& base = vocab[uniform_index(rng, 1 + uniform_index(rng, vocab.size()))];
      distinct.insert(base);
      const auto hits = retrieval::search(variant(rng, base), backend, cache, budget);
      c.expect(!hits.empty() && hits[0].doc_id == base, "cached hits differ from the backend's");
    }
    total_queries += len;
    c.expect(backend.calls == distinct.size(),
             fmt::format("sequence {}: {} backend calls for {} distinct queries", seq, backend.calls, distinct.size()));
    c.expect(budget.used() == distinct.size(), "budget charged for cache hits");
  }
  if (c.out.pass) c.out.detail = fmt::format("100 sequences, {} queries; calls == distinct every time", total_queries);
  return c.out;
}

Outcome filter_rules() {
  Checker c;
  const auto now = parse_rfc3339("2025-03-01T00:00:00Z");
  const auto fixtures = read_json_file(drtest::fixture("filters/temporal.json"));
  bool dropped_past = false, kept_anchored = false;
  for (const auto& f : fixtures) {
    const auto t = agent::trajectory_from_json(f.at("trajectory"));
    const auto before = agent::to_json(t);
    const bool keep = synth::temporal_filter(t, now);
    c.expect(keep == synth::temporal_filter(t, now), "temporal filter is not repeatable");
    c.expect(agent::to_json(t) == before, "temporal filter mutated its input");
    const auto name = f.at("name").get<std::string>();
    c.expect(keep == f.at("keep").get<bool>(), "fixture '" + name + "' misclassified");
    if (name == "time-agnostic query with a past year") dropped_past = !keep;
    if (name == "task-anchored year") kept_anchored = keep;
  }
  c.expect(dropped_past, "past-year fixture not dropped");
  c.expect(kept_anchored, "task-anchored fixture not kept");

  // Role reassessment: any mismatch discards the sample.
  Rng rng(12);
  const RubricRole roles[] = {RubricRole::kExplicit, RubricRole::kImplicit, RubricRole::kNegative};
  std::size_t mismatched = 0, discarded = 0, retained = 0;
  for (int s = 0; s < 200; ++s) {
    std::vector<Rubric> rubrics;
    const auto n = 2 + uniform_index(rng, 5);
    for (std::size_t i = 0; i < n; ++i) {
      const auto role = roles[uniform_index(rng, 3)];
      rubrics.push_back({fmt::format("r{}", i + 1), fmt::format("Criterion {}.", i + 1),
                         role == RubricRole::kNegative ? -1.0 : 1.0, role, "", false});
    }
    const bool mismatch = uniform_index(rng, 2) == 0;
    const auto flip = uniform_index(rng, n);
    Json reassessment = Json::array();
    for (std::size_t i = 0; i < n; ++i) {
      auto role = rubrics[i].role;
      if (mismatch && i == flip) role = roles[(static_cast<int>(role) + 1 + uniform_index(rng, 2)) % 3];
      reassessment.push_back({{"id", rubrics[i].id}, {"role", to_string(role)}, {"attribution", "task wording"}});
    }
    ScriptedModelClient model(
        std::vector<std::string>{Json{{"task_query", "Write the report."}, {"reassessment", reassessment}}.dump()});
    const auto sample = synth::synthesize_task("hidden summary", rubrics, model);
    if (mismatch) {
      ++mismatched;
      if (sample.status == synth::SampleStatus::kDiscardedRoleMismatch) ++discarded;
    } else {
      c.expect(sample.status == synth::SampleStatus::kRetained, fmt::format("sample {}: consistent roles discarded", s));
      ++retained;
    }
  }
  c.expect(discarded == mismatched, fmt::format("{} of {} mismatched samples discarded", discarded, mismatched));
  if (c.out.pass) {
    c.out.detail = fmt::format("temporal fixtures classified; {}/{} role mismatches discarded, {} consistent retained",
                               discarded, mismatched, retained);
  }
  return c.out;
}

Outcome end_to_end_episode() {
  Checker c;
  drtest::TempDir dir;
  auto index = std::make_shared<retrieval::ParagraphIndex>(
      retrieval::build_index(retrieval::load_corpus(drtest::fixture("corpus.jsonl"))));
  auto backend = std::make_shared<retrieval::LocalSearchBackend>(index, retrieval::AuthorityList{});
  auto search = std::make_shared<retrieval::SearchService>(backend, 50);
  agent::ToolRegistry tools;
  tools.add(retrieval::make_batch_web_surfer_tool(search));
  tools.add(toolkit::make_todo_tool(std::make_shared<toolkit::TodoStore>(dir / "todo.json")));
  tools.add(toolkit::make_file_read_tool(dir.path(), dir / "spill"));
  auto policy = load_scripted_client(drtest::fixture("agent/policy.jsonl"));
  agent::EpisodeConfig cfg;
  cfg.clock_now = parse_rfc3339("2025-03-01T00:00:00Z");
  const auto t = agent::run_episode(drtest::read_text(drtest::fixture("agent/query.txt")), cfg, *policy, tools);
  c.expect(t.termination == agent::Termination::kReportDelivered,
           fmt::format("terminated with {}", agent::to_string(t.termination)));
  c.expect(t.steps.size() == 5, fmt::format("{} turns", t.steps.size()));
  c.expect(t.final_report.has_value(), "no report");
  c.expect(!t.citations.empty(), "no citations");
  c.expect(t.dangling_citations.empty(), "dangling citations");
  if (c.out.pass) c.out.detail = fmt::format("5 turns, {} tool calls, {} citations resolved", t.tool_calls_made, t.citations.size());
  return c.out;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"strict-mapping truth table", 1, strict_mapping},
      {"GAE oracle equivalence", 10, gae_oracle},
      {"PPO clipped objective", 5, ppo_objective},
      {"judge ensemble lattice", 0, ensemble_lattice},
      {"subgraph sampler constraints", 60, sampler_constraints},
      {"pairing protocol arithmetic", 0, protocol_arithmetic},
      {"Elo conservation and replay", 0, elo_properties},
      {"agent budget enforcement", 60, budget_enforcement},
      {"patch editor", 0, patch_editor},
      {"offload round-trip", 0, offload_round_trip},
      {"search cache accounting", 0, cache_accounting},
      {"trajectory and synthesis filters", 0, filter_rules},
      {"end-to-end offline episode", 0, end_to_end_episode},
  };
  const auto suite_start = SteadyClock::now();
  int failed = 0;
  for (const auto& cr : criteria) {
    const auto start = SteadyClock::now();
    Outcome o;
    try {
      o = cr.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(SteadyClock::now() - start).count();
    if (o.pass && cr.time_limit_s > 0 && secs > cr.time_limit_s) {
      o = {false, fmt::format("took {:.2f} s, limit {:.0f} s", secs, cr.time_limit_s)};
    }
    failed += o.pass ? 0 : 1;
    std::cout << fmt::format("{} {} ({:.2f} s): {}", o.pass ? "PASS" : "FAIL", cr.name, secs, o.detail) << std::endl;
  }
  const double total = std::chrono::duration<double>(SteadyClock::now() - suite_start).count();
  std::cout << fmt::format("{} of {} criteria passed in {:.1f} s (offline, no frontend)", criteria.size() - failed,
                           criteria.size(), total)
            << std::endl;
  if (total > 300) {
    std::cout << "FAIL suite exceeded 5 minutes" << std::endl;
    return 1;
  }
  return failed == 0 ? 0 : 1;
}
