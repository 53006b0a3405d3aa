#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "dr/time.hpp"

namespace dr::retrieval {

struct Document {
  std::string doc_id;
  std::string site;
  std::string text;
  std::optional<Timestamp> published;
};

struct Paragraph {
  std::string para_id;  // "<doc_id>#p<n>", n starting at 1
  std::size_t doc_index = 0;
  std::string text;
  std::size_t length = 0;  // token count
};

struct Posting {
  std::uint32_t paragraph = 0;
  std::uint32_t term_frequency = 0;
};

struct ScoredParagraph {
  std::size_t paragraph = 0;
  double score = 0.0;
};

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

/// Blank-line-delimited segments with surrounding whitespace trimmed; empty
/// segments are dropped.
std::vector<std::string> split_paragraphs(std::string_view text);

/// Immutable paragraph-granular inverted index; safe for concurrent readers.
class ParagraphIndex {
 public:
  ParagraphIndex() = default;

  const std::vector<Document>& documents() const { return documents_; }
  const std::vector<Paragraph>& paragraphs() const { return paragraphs_; }
  const Document& document_of(const Paragraph& p) const { return documents_[p.doc_index]; }
  std::size_t term_count() const { return postings_.size(); }
  double average_length() const { return avg_length_; }

  /// Postings for a (case-folded) term; empty when absent.
  const std::vector<Posting>& postings(const std::string& term) const;

  /// BM25 over every paragraph containing at least one query term, in
  /// paragraph order.
  std::vector<ScoredParagraph> score(std::string_view query, Bm25Params params = {}) const;

  nlohmann::json to_json() const;

 private:
  friend ParagraphIndex build_index(std::vector<Document> corpus);

  std::vector<Document> documents_;
  std::vector<Paragraph> paragraphs_;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  double avg_length_ = 0.0;
};

/// Deterministic for a given corpus order. Throws dr::Error(kInvalidArgument)
/// on duplicate document ids.
ParagraphIndex build_index(std::vector<Document> corpus);

ParagraphIndex index_from_json(const nlohmann::json& j);

/// One document per *.txt/*.md file (doc_id = file stem, sorted by name), or
/// JSON Lines rows of {doc_id, site, text, published?}.
std::vector<Document> load_corpus(const std::filesystem::path& path);

}  // namespace dr::retrieval
