#include "dr/synth/filters.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "dr/agent/citations.hpp"
#include "dr/error.hpp"
#include "dr/synth/quality.hpp"
#include "dr/text.hpp"

namespace dr::synth {

double token_jaccard(const std::string& a, const std::string& b) {
  const auto ta = text::tokenize(a);
  const auto tb = text::tokenize(b);
  const std::set<std::string> sa(ta.begin(), ta.end());
  const std::set<std::string> sb(tb.begin(), tb.end());
  if (sa.empty() && sb.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& x : sa) inter += sb.count(x);
  return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

std::vector<std::string> string_leaves(const Json& j) {
  std::vector<std::string> out;
  if (j.is_string()) {
    out.push_back(j.get<std::string>());
  } else if (j.is_structured()) {
    for (const auto& v : j) {
      auto sub = string_leaves(v);
      out.insert(out.end(), sub.begin(), sub.end());
    }
  }
  return out;
}

std::vector<std::string> action_texts(const agent::Trajectory& t) {
  std::vector<std::string> out;
  for (const auto& call : agent::all_tool_calls(t)) {
    std::string s = call.name;
    for (const auto& v : string_leaves(call.arguments)) s += " " + v;
    out.push_back(std::move(s));
  }
  return out;
}

AlignmentDecision plan_alignment_filter(const agent::Trajectory& t, const std::vector<std::string>& plan,
                                        const AlignmentOptions& options) {
  if (plan.empty()) return {true, 1.0, 0};
  const auto actions = action_texts(t);
  const auto p = plan.size();
  const auto a = actions.size();
  std::vector<std::vector<std::size_t>> dp(p + 1, std::vector<std::size_t>(a + 1, 0));
  for (std::size_t i = 1; i <= p; ++i) {
    for (std::size_t j = 1; j <= a; ++j) {
      const bool m = token_jaccard(plan[i - 1], actions[j - 1]) >= options.step_match;
      dp[i][j] = std::max({dp[i - 1][j], dp[i][j - 1], dp[i - 1][j - 1] + (m ? 1 : 0)});
    }
  }
  AlignmentDecision d;
  d.matched = dp[p][a];
  d.alignment = static_cast<double>(d.matched) / static_cast<double>(p);
  d.keep = d.alignment >= options.keep;
  return d;
}

std::vector<std::size_t> select_shortest_correct(const std::vector<agent::Trajectory>& successful) {
  std::vector<std::size_t> out;
  std::size_t best = SIZE_MAX;
  for (std::size_t i = 0; i < successful.size(); ++i) {
    const auto n = successful[i].steps.size();
    if (n < best) {
      best = n;
      out.clear();
    }
    if (n == best) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> select_shortest_correct(const std::vector<agent::Trajectory>& candidates,
                                                 const std::string& reference) {
  std::vector<std::size_t> correct;
  std::vector<agent::Trajectory> subset;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& r = candidates[i].final_report;
    if (r && answers_match(*r, reference)) {
      correct.push_back(i);
      subset.push_back(candidates[i]);
    }
  }
  std::vector<std::size_t> out;
  for (auto k : select_shortest_correct(subset)) out.push_back(correct[k]);
  return out;
}

std::size_t max_ngram_repeats(const std::string& text, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "n-gram size must be positive");
  const auto tokens = text::tokenize(text);
  if (tokens.size() < n) return 0;
  std::map<std::vector<std::string>, std::size_t> counts;
  std::size_t best = 0;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    auto& c = counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                              tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
    best = std::max(best, c++);
  }
  return best;
}

std::string generated_text(const agent::Trajectory& t) {
  std::string s;
  for (const auto& step : t.steps) {
    if (!s.empty()) s += "\n\n";
    s += step.output;
  }
  return s;
}

std::vector<std::size_t> ngram_dedup(const std::vector<agent::Trajectory>& ts, std::size_t n,
                                     std::size_t threshold) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (max_ngram_repeats(generated_text(ts[i]), n) <= threshold) kept.push_back(i);
  }
  return kept;
}

std::vector<int> year_tokens(const std::string& text) {
  std::vector<int> out;
  for (const auto& tok : text::tokenize(text)) {
    if (tok.size() == 4 && std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; }) &&
        (tok.compare(0, 2, "19") == 0 || tok.compare(0, 2, "20") == 0)) {
      out.push_back(std::stoi(tok));
    }
  }
  return out;
}

bool temporal_filter(const agent::Trajectory& t, Timestamp now) {
  if (!year_tokens(t.query).empty()) return true;
  const int current = year_of(now);
  for (const auto& call : agent::all_tool_calls(t)) {
    for (const auto& s : string_leaves(call.arguments)) {
      for (int y : year_tokens(s)) {
        if (y < current) return false;
      }
    }
  }
  return true;
}

double foreign_script_density(const std::string& segment, Script primary) {
  std::size_t latin = 0;
  std::size_t cjk = 0;
  for (char32_t cp : text::decode_utf8(segment)) {
    if (text::is_latin_letter(cp)) {
      ++latin;
    } else if (text::is_cjk(cp)) {
      ++cjk;
    }
  }
  if (latin + cjk == 0) return 0.0;
  const auto foreign = primary == Script::kLatin ? cjk : latin;
  return static_cast<double>(foreign) / static_cast<double>(latin + cjk);
}

std::vector<std::string> prose_segments(const std::string& input) {
  std::string prose;
  bool in_fence = false;
  for (const auto& line : text::split_lines(input)) {
    if (text::trim(line).rfind("```", 0) == 0) {
      in_fence = !in_fence;
      prose += "\n";
      continue;
    }
    if (!in_fence) prose += line + "\n";
  }
  // Tool-call blocks are payloads, not prose.
  for (auto open = prose.find("<tool_call>"); open != std::string::npos; open = prose.find("<tool_call>")) {
    const auto close = prose.find("</tool_call>", open);
    prose.erase(open, close == std::string::npos ? std::string::npos : close + 12 - open);
  }
  std::vector<std::string> out;
  std::string cur;
  for (const auto& line : text::split_lines(prose)) {
    if (text::trim(line).empty()) {
      if (!text::trim(cur).empty()) out.push_back(text::trim(cur));
      cur.clear();
    } else {
      cur += line + "\n";
    }
  }
  if (!text::trim(cur).empty()) out.push_back(text::trim(cur));
  return out;
}

bool language_mix_filter(const std::string& text, Script primary, double density_threshold) {
  for (const auto& seg : prose_segments(text)) {
    if (foreign_script_density(seg, primary) > density_threshold) return false;
  }
  return true;
}

bool language_mix_filter(const agent::Trajectory& t, Script primary, double density_threshold) {
  return language_mix_filter(generated_text(t), primary, density_threshold);
}

std::string to_string(NoiseClass c) {
  switch (c) {
    case NoiseClass::kClean: return "clean";
    case NoiseClass::kRecovered: return "recovered";
    case NoiseClass::kUnrecovered: return "unrecovered";
  }
  return "unknown";
}

NoiseClass classify_noise(const agent::Trajectory& t) {
  std::map<std::string, bool> pending;  // tool -> failed and not yet recovered
  bool any = false;
  for (const auto& step : t.steps) {
    for (const auto& o : step.observations) {
      const bool failed = o.is_error || text::trim(o.content).empty() ||
                          o.content.find("(no results)") != std::string::npos;
      if (failed) {
        pending[o.tool_name] = true;
        any = true;
      } else {
        pending[o.tool_name] = false;
      }
    }
  }
  if (!any) return NoiseClass::kClean;
  for (const auto& [tool, open] : pending) {
    if (open) return NoiseClass::kUnrecovered;
  }
  return t.final_report ? NoiseClass::kRecovered : NoiseClass::kUnrecovered;
}

NoiseRetention retain_noise(const std::vector<agent::Trajectory>& ts, double ratio, Rng& rng) {
  if (!(ratio >= 0.0 && ratio < 1.0)) throw Error(ErrorCode::kInvalidArgument, "ratio must lie in [0, 1)");
  std::vector<std::size_t> clean;
  std::vector<std::size_t> noisy;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    switch (classify_noise(ts[i])) {
      case NoiseClass::kClean: clean.push_back(i); break;
      case NoiseClass::kRecovered: noisy.push_back(i); break;
      case NoiseClass::kUnrecovered: break;
    }
  }
  // noisy / (clean + noisy) <= ratio
  const auto quota = static_cast<std::size_t>(ratio * static_cast<double>(clean.size()) / (1.0 - ratio));
  shuffle(noisy, rng);
  if (noisy.size() > quota) noisy.resize(quota);
  std::sort(noisy.begin(), noisy.end());
  NoiseRetention r;
  r.flagged = noisy;
  r.kept = clean;
  r.kept.insert(r.kept.end(), noisy.begin(), noisy.end());
  std::sort(r.kept.begin(), r.kept.end());
  return r;
}

std::string normalize_citations(const std::string& report, const std::vector<agent::Source>& sources) {
  std::set<std::string> keys;
  for (const auto& s : sources) keys.insert(s.key);
  std::string out;
  std::size_t i = 0;
  while (i < report.size()) {
    const auto open = report.find('[', i);
    if (open == std::string::npos) break;
    const auto close = report.find(']', open);
    if (close == std::string::npos) break;
    out.append(report, i, open - i);
    const auto inner = report.substr(open + 1, close - open - 1);
    std::vector<std::string> parts;
    bool all_known = !inner.empty();
    std::size_t s = 0;
    while (all_known) {
      const auto comma = inner.find(',', s);
      auto k = text::trim(inner.substr(s, comma == std::string::npos ? std::string::npos : comma - s));
      all_known = keys.count(k) != 0;
      parts.push_back(std::move(k));
      if (comma == std::string::npos) break;
      s = comma + 1;
    }
    if (all_known) {
      out += "\\cite{";
      for (std::size_t p = 0; p < parts.size(); ++p) out += (p ? "," : "") + parts[p];
      out += "}";
      i = close + 1;
    } else {
      out += '[';
      i = open + 1;
    }
  }
  out.append(report, i, std::string::npos);
  return out;
}

bool citation_format_filter(const agent::Trajectory& t) {
  if (!t.final_report) return false;
  std::vector<agent::Source> sources;
  for (const auto& step : t.steps) {
    for (const auto& o : step.observations) sources.insert(sources.end(), o.sources.begin(), o.sources.end());
  }
  const auto r = agent::validate_report_citations(*t.final_report, sources);
  return r.resolved > 0 && r.dangling.empty();
}

}  // namespace dr::synth
