#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dr/agent/trajectory.hpp"

namespace dr::agent {

/// Keys of every \cite{a,b} group in order of first appearance, deduplicated.
std::vector<std::string> extract_cite_keys(std::string_view report);

CitationReport validate_report_citations(std::string_view report, std::span<const Source> sources);

}  // namespace dr::agent
