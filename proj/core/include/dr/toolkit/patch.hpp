#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

namespace dr::toolkit {

struct PatchRequest {
  std::filesystem::path target_path;
  std::string anchor;       // current text to locate, with minimal context
  std::string replacement;  // text that takes the anchor's place
  double min_similarity = 0.85;
};

struct PatchOptions {
  // The winning fuzzy candidate must beat the best non-overlapping runner-up
  // by at least this much.
  double ambiguity_margin = 0.05;
  std::size_t min_anchor_chars = 8;  // non-whitespace code points
  // Runs after the temp file is written and before the rename. Exceptions
  // abort the patch with the target untouched (used for fault injection).
  std::function<void(const std::filesystem::path& temp_file)> before_commit;
};

enum class MatchKind { kExact, kFuzzy };

struct PatchResult {
  MatchKind match_kind = MatchKind::kExact;
  double similarity = 1.0;
};

/// Replaces exactly one occurrence of the anchor. An exact unique occurrence
/// wins; otherwise whitespace-normalized line windows are scored by
/// normalized Levenshtein similarity. Fuzzy matches replace whole lines.
/// Writes are all-or-nothing. Errors: kAnchorTooShort, kNoMatch, kAmbiguous,
/// kIo, kInvalidArgument.
PatchResult apply_patch(const PatchRequest& request, const PatchOptions& options = {});

/// 1 - levenshtein(a, b) / max(|a|, |b|) over code points; 1.0 for two empty strings.
double normalized_similarity(std::string_view a, std::string_view b);

/// Bytes the agent has to emit for this patch.
inline std::size_t patch_payload_bytes(const PatchRequest& r) {
  return r.anchor.size() + r.replacement.size();
}

}  // namespace dr::toolkit
