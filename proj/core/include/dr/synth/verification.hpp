#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dr/jsonl.hpp"
#include "dr/model.hpp"
#include "dr/retrieval/search.hpp"

namespace dr::synth {

enum class Conclusion { kSupport, kRefute, kDoubtful };
std::string to_string(Conclusion c);
Conclusion parse_conclusion(const std::string& s);

struct VerificationPoint {
  std::string claim;
  std::string source_span;
  std::optional<Conclusion> conclusion;
  std::vector<std::string> evidence;  // paragraph ids, or "search:<query>" when nothing was found
  std::vector<std::string> queries;
  std::vector<std::size_t> depends_on;
};

struct TraceEntry {
  std::string stage;
  Json detail;
};

struct VerificationOptions {
  std::size_t k = 5;
  std::size_t max_replans = 1;  // rounds of fresh queries for doubtful points
};

struct VerificationResult {
  std::vector<VerificationPoint> points;
  std::vector<TraceEntry> trace;
  std::string report;
  bool completed = false;
  std::string failed_stage;
  std::string error;
};

/// Runs extract, plan, verify, replan and report in that order. A failing
/// stage stops the run; the points and trace gathered so far are returned
/// with completed = false.
VerificationResult verification_workflow(const std::string& material, retrieval::SearchService& search,
                                         ModelClient& model, const VerificationOptions& options = {});

/// Asks the judge whether the conclusion follows from the cited evidence.
/// Anything other than a clear yes drops the point.
bool posterior_filter(const VerificationPoint& point, ModelClient& judge);

Json to_json(const VerificationPoint& p);
Json to_json(const VerificationResult& r);

}  // namespace dr::synth
