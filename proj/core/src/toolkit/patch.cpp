#include "dr/toolkit/patch.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "dr/error.hpp"
#include "dr/text.hpp"

namespace dr::toolkit {

namespace fs = std::filesystem;

namespace {

// Patches to the same file are serialized in-process.
std::mutex& path_mutex(const fs::path& p) {
  static std::mutex registry_mu;
  static std::map<std::string, std::unique_ptr<std::mutex>> registry;
  std::error_code ec;
  auto key = fs::weakly_canonical(p, ec).string();
  if (ec) key = fs::absolute(p).string();
  std::lock_guard lock(registry_mu);
  auto& slot = registry[key];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  std::string out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (true) {
    const auto hit = s.find(from, pos);
    if (hit == std::string::npos) {
      out.append(s, pos, std::string::npos);
      break;
    }
    out.append(s, pos, hit - pos);
    out.append(to);
    pos = hit + from.size();
  }
  return out;
}

std::string to_lf(std::string s) { return replace_all(std::move(s), "\r\n", "\n"); }

std::size_t non_ws_count(std::string_view s) {
  std::size_t n = 0;
  for (char32_t cp : text::decode_utf8(s)) {
    if (!text::is_space(cp)) ++n;
  }
  return n;
}

// Levenshtein distance restricted to a diagonal band of half-width `limit`.
// Returns limit + 1 when the true distance exceeds the limit.
std::size_t bounded_levenshtein(const std::vector<char32_t>& a, const std::vector<char32_t>& b,
                                std::size_t limit) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const std::size_t over = limit + 1;
  if ((n > m ? n - m : m - n) > limit) return over;
  std::vector<std::size_t> prev(m + 1, over), cur(m + 1, over);
  for (std::size_t j = 0; j <= std::min(m, limit); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    const std::size_t lo = i > limit ? i - limit : 0;
    const std::size_t hi = std::min(m, i + limit);
    std::fill(cur.begin(), cur.end(), over);
    if (lo == 0) cur[0] = i;
    std::size_t row_min = lo == 0 ? cur[0] : over;
    for (std::size_t j = std::max<std::size_t>(lo, 1); j <= hi; ++j) {
      std::size_t v = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      v = std::min(v, prev[j] + 1);
      v = std::min(v, cur[j - 1] + 1);
      cur[j] = std::min(v, over);
      row_min = std::min(row_min, cur[j]);
    }
    if (row_min > limit) return over;
    std::swap(prev, cur);
  }
  return std::min(prev[m], over);
}

struct Candidate {
  double similarity = 0.0;
  std::size_t first_line = 0;
  std::size_t line_count = 0;

  bool overlaps(const Candidate& o) const {
    return first_line < o.first_line + o.line_count && o.first_line < first_line + line_count;
  }
};

void commit_atomically(const fs::path& target, const std::string& content,
                       const PatchOptions& options) {
  static std::atomic<unsigned> counter{0};
  const auto dir = target.has_parent_path() ? target.parent_path() : fs::path(".");
  const auto tmp = dir / fmt::format(".{}.patch-{}-{}", target.filename().string(), ::getpid(),
                                     counter.fetch_add(1));
  try {
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(ErrorCode::kIo, "cannot create " + tmp.string());
      out.write(content.data(), static_cast<std::streamsize>(content.size()));
      out.flush();
      if (!out) throw Error(ErrorCode::kIo, "short write to " + tmp.string());
    }
    std::error_code ec;
    const auto perms = fs::status(target, ec).permissions();
    if (!ec) fs::permissions(tmp, perms, ec);
    if (options.before_commit) options.before_commit(tmp);
    fs::rename(tmp, target, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot replace " + target.string() + ": " + ec.message());
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

}  // namespace

double normalized_similarity(std::string_view a, std::string_view b) {
  const auto ca = text::decode_utf8(a);
  const auto cb = text::decode_utf8(b);
  const std::size_t longest = std::max(ca.size(), cb.size());
  if (longest == 0) return 1.0;
  const auto d = bounded_levenshtein(ca, cb, longest);
  return 1.0 - static_cast<double>(d) / static_cast<double>(longest);
}

PatchResult apply_patch(const PatchRequest& request, const PatchOptions& options) {
  if (!(request.min_similarity >= 0.0 && request.min_similarity <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "min_similarity must lie in [0, 1]");
  }
  if (non_ws_count(request.anchor) < options.min_anchor_chars) {
    throw Error(ErrorCode::kAnchorTooShort,
                fmt::format("anchor needs at least {} non-whitespace characters",
                            options.min_anchor_chars));
  }

  std::lock_guard lock(path_mutex(request.target_path));

  std::string original;
  {
    std::ifstream in(request.target_path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot open " + request.target_path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    original = ss.str();
  }
  const bool crlf = original.find("\r\n") != std::string::npos;
  const std::string content = to_lf(original);
  const std::string anchor = to_lf(request.anchor);
  const std::string replacement = to_lf(request.replacement);

  auto finish = [&](std::string updated, PatchResult result) {
    if (crlf) updated = replace_all(std::move(updated), "\n", "\r\n");
    commit_atomically(request.target_path, updated, options);
    return result;
  };

  // Exact path.
  const auto first = content.find(anchor);
  if (first != std::string::npos) {
    if (content.find(anchor, first + 1) != std::string::npos) {
      throw Error(ErrorCode::kAmbiguous, "anchor occurs more than once in " +
                                             request.target_path.string());
    }
    std::string updated = content.substr(0, first) + replacement +
                          content.substr(first + anchor.size());
    return finish(std::move(updated), {MatchKind::kExact, 1.0});
  }

  // Fuzzy path over whole-line windows.
  const auto norm_anchor = text::decode_utf8(text::collapse_whitespace(anchor));
  if (norm_anchor.empty()) throw Error(ErrorCode::kAnchorTooShort, "anchor is blank");

  std::vector<std::size_t> line_start{0};
  for (std::size_t i = 0; i < content.size(); ++i) {
    if (content[i] == '\n') line_start.push_back(i + 1);
  }
  // A trailing newline does not open another line.
  if (line_start.size() > 1 && line_start.back() == content.size()) line_start.pop_back();
  const std::size_t n_lines = line_start.size();
  auto line_end = [&](std::size_t i) {  // exclusive, without the newline
    const std::size_t next = i + 1 < n_lines ? line_start[i + 1] - 1 : content.size();
    return next;
  };

  std::size_t anchor_lines = 1;
  {
    const auto t = text::trim(anchor);
    anchor_lines += static_cast<std::size_t>(std::count(t.begin(), t.end(), '\n'));
  }

  const double floor_sim = std::max(0.0, request.min_similarity - options.ambiguity_margin);
  std::vector<Candidate> candidates;
  for (std::size_t w = anchor_lines > 1 ? anchor_lines - 1 : 1; w <= anchor_lines + 1; ++w) {
    if (w > n_lines) break;
    for (std::size_t i = 0; i + w <= n_lines; ++i) {
      const auto begin = line_start[i];
      const auto end = line_end(i + w - 1);
      const auto window =
          text::decode_utf8(text::collapse_whitespace(std::string_view(content).substr(begin, end - begin)));
      if (window.empty()) continue;
      const std::size_t longest = std::max(window.size(), norm_anchor.size());
      const auto limit =
          static_cast<std::size_t>(std::floor((1.0 - floor_sim) * static_cast<double>(longest) + 1e-9));
      const auto d = bounded_levenshtein(window, norm_anchor, limit);
      if (d > limit) continue;
      const double sim = 1.0 - static_cast<double>(d) / static_cast<double>(longest);
      if (sim + 1e-12 < floor_sim) continue;
      candidates.push_back({sim, i, w});
    }
  }

  auto better = [anchor_lines](const Candidate& a, const Candidate& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    const auto da = a.line_count > anchor_lines ? a.line_count - anchor_lines : anchor_lines - a.line_count;
    const auto db = b.line_count > anchor_lines ? b.line_count - anchor_lines : anchor_lines - b.line_count;
    if (da != db) return da < db;
    return a.first_line < b.first_line;
  };
  std::optional<Candidate> best;
  for (const auto& c : candidates) {
    if (!best || better(c, *best)) best = c;
  }
  if (!best || best->similarity < request.min_similarity) {
    throw Error(ErrorCode::kNoMatch,
                fmt::format("no window reaches similarity {:.2f} (best {:.3f})",
                            request.min_similarity, best ? best->similarity : 0.0));
  }
  for (const auto& c : candidates) {
    if (c.overlaps(*best)) continue;
    if (best->similarity - c.similarity < options.ambiguity_margin) {
      throw Error(ErrorCode::kAmbiguous,
                  fmt::format("fuzzy candidates at lines {} and {} are within margin ({:.3f} vs {:.3f})",
                              best->first_line + 1, c.first_line + 1, best->similarity, c.similarity));
    }
  }

  const auto begin = line_start[best->first_line];
  const auto end = line_end(best->first_line + best->line_count - 1);
  std::string body = replacement;
  while (!body.empty() && body.back() == '\n') body.pop_back();
  std::string updated = content.substr(0, begin) + body + content.substr(end);
  return finish(std::move(updated), {MatchKind::kFuzzy, best->similarity});
}

}  // namespace dr::toolkit
