#include "dr/agent/citations.hpp"

#include <algorithm>
#include <unordered_set>

#include "dr/text.hpp"

namespace dr::agent {

std::vector<std::string> extract_cite_keys(std::string_view report) {
  static constexpr std::string_view kCite = "\\cite{";
  std::vector<std::string> keys;
  std::unordered_set<std::string> seen;
  std::size_t pos = 0;
  while ((pos = report.find(kCite, pos)) != std::string_view::npos) {
    const auto begin = pos + kCite.size();
    const auto end = report.find('}', begin);
    if (end == std::string_view::npos) break;
    auto group = report.substr(begin, end - begin);
    std::size_t start = 0;
    while (start <= group.size()) {
      auto comma = group.find(',', start);
      if (comma == std::string_view::npos) comma = group.size();
      auto key = text::trim(group.substr(start, comma - start));
      if (!key.empty() && seen.insert(key).second) keys.push_back(std::move(key));
      start = comma + 1;
    }
    pos = end + 1;
  }
  return keys;
}

CitationReport validate_report_citations(std::string_view report, std::span<const Source> sources) {
  CitationReport out;
  out.cited = extract_cite_keys(report);
  for (const auto& key : out.cited) {
    const bool found = std::any_of(sources.begin(), sources.end(),
                                   [&](const Source& s) { return s.key == key; });
    if (found) {
      ++out.resolved;
    } else {
      out.dangling.push_back(key);
    }
  }
  return out;
}

}  // namespace dr::agent
