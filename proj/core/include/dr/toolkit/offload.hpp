#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <variant>

namespace dr::toolkit {

inline constexpr std::size_t kDefaultOffloadThreshold = 8192;

using Summarizer =
    std::function<std::string(std::string_view payload, const std::filesystem::path& spill_path)>;

/// Deterministic default: the first and last `edge_bytes` bytes plus a note
/// saying where the full payload lives and how to page through it.
std::string head_tail_summary(std::string_view payload, const std::filesystem::path& spill_path,
                              std::size_t edge_bytes = 512);

struct InlinePayload {
  std::string payload;
};

struct OffloadRecord {
  std::string summary;
  std::filesystem::path spill_path;
  std::size_t original_length = 0;
  std::size_t threshold = 0;
};

using OffloadOutcome = std::variant<InlinePayload, OffloadRecord>;

/// Payloads of at most `threshold` bytes stay inline and unchanged; larger
/// ones are written verbatim to `spill_path` and replaced by a summary.
/// Throws dr::Error(kIo) when the spill file cannot be written.
OffloadOutcome offload_result(std::string payload, std::size_t threshold,
                              const Summarizer& summarizer,
                              const std::filesystem::path& spill_path);

/// Returns min(length, size - offset) bytes starting at offset; an offset at
/// or past the end yields an empty page. Throws dr::Error(kIo) for a missing file.
std::string read_page(const std::filesystem::path& spill_path, std::size_t offset,
                      std::size_t length);

/// Per-episode offloader that names spill files sequentially under one directory.
class Offloader {
 public:
  explicit Offloader(std::filesystem::path spill_dir,
                     std::size_t threshold = kDefaultOffloadThreshold,
                     Summarizer summarizer = {});

  OffloadOutcome offload(std::string payload);

  const std::filesystem::path& spill_dir() const { return spill_dir_; }
  std::size_t threshold() const { return threshold_; }

 private:
  std::filesystem::path spill_dir_;
  std::size_t threshold_;
  Summarizer summarizer_;
  std::atomic<std::size_t> counter_{0};
};

}  // namespace dr::toolkit
