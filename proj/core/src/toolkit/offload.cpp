#include "dr/toolkit/offload.hpp"

#include <fstream>

#include <fmt/format.h>

#include "dr/error.hpp"

namespace dr::toolkit {

namespace fs = std::filesystem;

namespace {

// Moves `pos` back to the start of the UTF-8 sequence it points into.
std::size_t utf8_floor(std::string_view s, std::size_t pos) {
  while (pos > 0 && pos < s.size() && (static_cast<unsigned char>(s[pos]) & 0xC0) == 0x80) --pos;
  return pos;
}

}  // namespace

std::string head_tail_summary(std::string_view payload, const fs::path& spill_path,
                              std::size_t edge_bytes) {
  const std::size_t head_end = utf8_floor(payload, std::min(edge_bytes, payload.size()));
  std::size_t tail_begin = payload.size() > edge_bytes ? payload.size() - edge_bytes : 0;
  tail_begin = std::max(head_end, utf8_floor(payload, tail_begin));
  return fmt::format(
      "{}\n[... {} bytes omitted; full output ({} bytes) saved to {}; page through it with "
      "file.read {{\"path\", \"offset\", \"length\"}} ...]\n{}",
      payload.substr(0, head_end), tail_begin - head_end, payload.size(), spill_path.string(),
      payload.substr(tail_begin));
}

OffloadOutcome offload_result(std::string payload, std::size_t threshold,
                              const Summarizer& summarizer, const fs::path& spill_path) {
  if (threshold == 0) throw Error(ErrorCode::kInvalidArgument, "offload threshold must be positive");
  if (payload.size() <= threshold) return InlinePayload{std::move(payload)};

  std::error_code ec;
  if (spill_path.has_parent_path()) fs::create_directories(spill_path.parent_path(), ec);
  {
    std::ofstream out(spill_path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write spill file " + spill_path.string());
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "short write to spill file " + spill_path.string());
  }
  OffloadRecord rec;
  rec.summary = summarizer ? summarizer(payload, spill_path) : head_tail_summary(payload, spill_path);
  rec.spill_path = spill_path;
  rec.original_length = payload.size();
  rec.threshold = threshold;
  return rec;
}

std::string read_page(const fs::path& spill_path, std::size_t offset, std::size_t length) {
  std::ifstream in(spill_path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + spill_path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  if (offset >= size || length == 0) return {};
  const std::size_t n = std::min(length, size - offset);
  std::string page(n, '\0');
  in.seekg(static_cast<std::streamoff>(offset));
  in.read(page.data(), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw Error(ErrorCode::kIo, "short read from " + spill_path.string());
  }
  return page;
}

Offloader::Offloader(fs::path spill_dir, std::size_t threshold, Summarizer summarizer)
    : spill_dir_(std::move(spill_dir)), threshold_(threshold), summarizer_(std::move(summarizer)) {
  if (threshold_ == 0) throw Error(ErrorCode::kInvalidArgument, "offload threshold must be positive");
}

OffloadOutcome Offloader::offload(std::string payload) {
  if (payload.size() <= threshold_) return InlinePayload{std::move(payload)};
  const auto path = spill_dir_ / fmt::format("spill-{:05}.txt", counter_.fetch_add(1) + 1);
  return offload_result(std::move(payload), threshold_, summarizer_, path);
}

}  // namespace dr::toolkit
