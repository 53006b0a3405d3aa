#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dr/retrieval/index.hpp"

namespace dr::retrieval {

struct AuthorityList {
  std::set<std::string> sites;
  // An authoritative hit is promoted over a comparable non-authoritative one
  // only while relevance * boost still reaches the other hit's relevance.
  double boost = 1.5;

  /// Exact site or any subdomain of a listed site.
  bool is_authoritative(std::string_view site) const;

  /// Newline-delimited sites; blank lines and '#' comments ignored.
  static AuthorityList load(const std::filesystem::path& path, double boost = 1.5);
};

struct SearchHit {
  std::string para_id;
  std::string doc_id;
  std::string site;
  std::string snippet;
  double relevance = 0.0;
  bool authoritative = false;
  std::size_t final_rank = 0;  // 1-based

  bool operator==(const SearchHit&) const = default;
};

struct RankingOptions {
  // Two relevances are comparable when they differ by at most this fraction
  // of the larger one.
  double comparability = 0.02;
};

bool comparable(double a, double b, double fraction);

/// Orders hits by relevance (ties by para_id), then lets each authoritative
/// hit move ahead of comparable non-authoritative hits. Assigns final_rank.
void rank_hits(std::vector<SearchHit>& hits, double boost, const RankingOptions& options = {});

/// Case-folded, whitespace-collapsed and trimmed. Idempotent.
std::string normalize_query(std::string_view query);

struct SearchParams {
  std::size_t k = 10;
  std::vector<std::string> sites;           // restrict to these sites when nonempty
  std::optional<Timestamp> published_after;  // drop older or undated documents

  std::string cache_key(const std::string& normalized_query) const;
};

/// Anything that answers a normalized query. The live web client implements
/// the same contract as the local index.
class SearchBackend {
 public:
  virtual ~SearchBackend() = default;
  virtual std::vector<SearchHit> search(const std::string& normalized_query,
                                        const SearchParams& params) = 0;
};

class LocalSearchBackend : public SearchBackend {
 public:
  LocalSearchBackend(std::shared_ptr<const ParagraphIndex> index, AuthorityList authority,
                     RankingOptions ranking = {}, Bm25Params bm25 = {});

  std::vector<SearchHit> search(const std::string& normalized_query,
                                const SearchParams& params) override;

  std::size_t invocations() const { return invocations_.load(); }
  const ParagraphIndex& index() const { return *index_; }

 private:
  std::shared_ptr<const ParagraphIndex> index_;
  AuthorityList authority_;
  RankingOptions ranking_;
  Bm25Params bm25_;
  std::atomic<std::size_t> invocations_{0};
};

/// Exact-key LRU cache. Concurrent lookups and inserts are safe; inserting an
/// existing key replaces it.
class QueryCache {
 public:
  explicit QueryCache(std::size_t capacity = 4096);

  std::optional<std::vector<SearchHit>> lookup(const std::string& key);
  void insert(const std::string& key, std::vector<SearchHit> hits);
  std::size_t size() const;
  std::size_t capacity() const { return capacity_; }

 private:
  using Entry = std::pair<std::string, std::vector<SearchHit>>;
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::list<Entry> order_;  // most recent first
  std::unordered_map<std::string, std::list<Entry>::iterator> map_;
};

/// Backend-call allowance shared by one episode. Cache hits are free.
class SearchBudget {
 public:
  explicit SearchBudget(std::size_t calls) : remaining_(calls) {}
  bool try_consume();
  std::size_t remaining() const { return remaining_.load(); }
  std::size_t used() const { return used_.load(); }

 private:
  std::atomic<std::size_t> remaining_;
  std::atomic<std::size_t> used_{0};
};

/// Cache first; a miss consumes one budget unit and calls the backend.
/// Throws dr::Error(kBudgetExhausted) on a miss with no budget left.
std::vector<SearchHit> search(std::string_view query, SearchBackend& backend, QueryCache& cache,
                              SearchBudget& budget, const SearchParams& params = {});

/// Convenience bundle handed to tools and pipelines.
class SearchService {
 public:
  SearchService(std::shared_ptr<SearchBackend> backend, std::size_t budget,
                std::size_t cache_capacity = 4096);

  std::vector<SearchHit> search(std::string_view query, const SearchParams& params = {});

  SearchBackend& backend() { return *backend_; }
  QueryCache& cache() { return cache_; }
  SearchBudget& budget() { return budget_; }

 private:
  std::shared_ptr<SearchBackend> backend_;
  QueryCache cache_;
  SearchBudget budget_;
};

}  // namespace dr::retrieval
