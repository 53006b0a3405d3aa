#include "dr/retrieval/search.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "dr/error.hpp"
#include "dr/text.hpp"

namespace dr::retrieval {

namespace {

constexpr std::size_t kSnippetCodePoints = 2000;

bool site_matches(std::string_view site, std::string_view listed) {
  if (site == listed) return true;
  return site.size() > listed.size() && site.ends_with(listed) &&
         site[site.size() - listed.size() - 1] == '.';
}

bool by_relevance(const SearchHit& a, const SearchHit& b) {
  if (a.relevance != b.relevance) return a.relevance > b.relevance;
  return a.para_id < b.para_id;
}

}  // namespace

bool AuthorityList::is_authoritative(std::string_view site) const {
  if (site.empty()) return false;
  const auto folded = text::fold_case(site);
  return std::any_of(sites.begin(), sites.end(),
                     [&](const std::string& s) { return site_matches(folded, s); });
}

AuthorityList AuthorityList::load(const std::filesystem::path& path, double boost) {
  if (!(boost >= 1.0) || !std::isfinite(boost)) {
    throw Error(ErrorCode::kInvalidArgument, "authority boost must be finite and >= 1");
  }
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open authority list " + path.string());
  AuthorityList list;
  list.boost = boost;
  std::string line;
  while (std::getline(in, line)) {
    auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    list.sites.insert(text::fold_case(t));
  }
  return list;
}

bool comparable(double a, double b, double fraction) {
  // For non-negative values this form is monotone under rounding, which the
  // linear ranking pass below relies on.
  if (a >= 0.0 && b >= 0.0) return std::min(a, b) >= (1.0 - fraction) * std::max(a, b);
  return std::abs(a - b) <= fraction * std::max(std::abs(a), std::abs(b));
}

namespace {

// Reference pass: each authoritative hit bubbles up past comparable
// non-authoritative hits it reaches after the boost.
void rank_by_insertion(std::vector<SearchHit>& hits, double boost, double fraction) {
  for (std::size_t i = 1; i < hits.size(); ++i) {
    if (!hits[i].authoritative) continue;
    std::size_t j = i;
    while (j > 0 && !hits[j - 1].authoritative && comparable(hits[j - 1].relevance, hits[j].relevance, fraction) &&
           hits[j].relevance * boost >= hits[j - 1].relevance) {
      std::swap(hits[j - 1], hits[j]);
      --j;
    }
  }
}

// Same result in O(n log n) when relevances are non-negative: whether an
// authoritative hit passes a non-authoritative one is then monotone in the
// latter's relevance, so each stop point is a binary search bounded below by
// the previous authoritative hit's stop point.
void rank_by_merge(std::vector<SearchHit>& hits, double boost, double fraction) {
  std::vector<std::size_t> plain;
  std::vector<std::pair<std::size_t, std::size_t>> boosted;  // hit, stop index into plain
  std::size_t floor = 0;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (!hits[i].authoritative) {
      plain.push_back(i);
      continue;
    }
    const double a = hits[i].relevance;
    const auto stop = std::partition_point(
        plain.begin() + static_cast<std::ptrdiff_t>(floor), plain.end(), [&](std::size_t n) {
          const double r = hits[n].relevance;
          return !(comparable(r, a, fraction) && a * boost >= r);
        });
    floor = static_cast<std::size_t>(stop - plain.begin());
    boosted.emplace_back(i, floor);
  }
  std::vector<SearchHit> out;
  out.reserve(hits.size());
  std::size_t b = 0;
  for (std::size_t p = 0; p <= plain.size(); ++p) {
    while (b < boosted.size() && boosted[b].second == p) out.push_back(std::move(hits[boosted[b++].first]));
    if (p < plain.size()) out.push_back(std::move(hits[plain[p]]));
  }
  hits = std::move(out);
}

}  // namespace

void rank_hits(std::vector<SearchHit>& hits, double boost, const RankingOptions& options) {
  std::sort(hits.begin(), hits.end(), by_relevance);
  const bool non_negative = std::all_of(hits.begin(), hits.end(), [](const SearchHit& h) { return h.relevance >= 0.0; });
  if (non_negative && boost >= 0.0) {
    rank_by_merge(hits, boost, options.comparability);
  } else {
    rank_by_insertion(hits, boost, options.comparability);
  }
  for (std::size_t i = 0; i < hits.size(); ++i) hits[i].final_rank = i + 1;
}

std::string normalize_query(std::string_view query) {
  return text::collapse_whitespace(text::fold_case(query));
}

std::string SearchParams::cache_key(const std::string& normalized_query) const {
  std::string key = normalized_query;
  key += fmt::format("\x1f" "k={}", k);
  if (!sites.empty()) {
    auto sorted = sites;
    std::sort(sorted.begin(), sorted.end());
    key += "\x1f" "sites=";
    for (const auto& s : sorted) key += text::fold_case(s) + ",";
  }
  if (published_after) key += "\x1f" "after=" + format_rfc3339(*published_after);
  return key;
}

LocalSearchBackend::LocalSearchBackend(std::shared_ptr<const ParagraphIndex> index,
                                       AuthorityList authority, RankingOptions ranking,
                                       Bm25Params bm25)
    : index_(std::move(index)), authority_(std::move(authority)), ranking_(ranking), bm25_(bm25) {
  if (!index_) throw Error(ErrorCode::kInvalidArgument, "search backend needs an index");
}

std::vector<SearchHit> LocalSearchBackend::search(const std::string& normalized_query,
                                                  const SearchParams& params) {
  invocations_.fetch_add(1);
  const auto& paragraphs = index_->paragraphs();
  std::vector<std::string> sites;
  for (const auto& s : params.sites) sites.push_back(text::fold_case(s));

  std::vector<ScoredParagraph> kept;
  for (const auto& sp : index_->score(normalized_query, bm25_)) {
    const auto& doc = index_->document_of(paragraphs[sp.paragraph]);
    if (!sites.empty()) {
      const auto site = text::fold_case(doc.site);
      if (std::none_of(sites.begin(), sites.end(), [&](const std::string& s) { return site_matches(site, s); })) {
        continue;
      }
    }
    if (params.published_after && (!doc.published || *doc.published < *params.published_after)) continue;
    kept.push_back(sp);
  }

  // A hit can only move ahead of hits whose relevance it reaches after the
  // boost, so anything below kth / boost can never enter the top k.
  if (kept.size() > params.k && params.k > 0) {
    auto kth = kept.begin() + static_cast<std::ptrdiff_t>(params.k - 1);
    std::nth_element(kept.begin(), kth, kept.end(),
                     [](const ScoredParagraph& a, const ScoredParagraph& b) { return a.score > b.score; });
    const double floor = kth->score / std::max(1.0, authority_.boost);
    std::erase_if(kept, [floor](const ScoredParagraph& sp) { return sp.score < floor; });
  }

  std::vector<SearchHit> hits;
  hits.reserve(kept.size());
  for (const auto& sp : kept) {
    const auto& para = paragraphs[sp.paragraph];
    const auto& doc = index_->document_of(para);
    SearchHit h;
    h.para_id = para.para_id;
    h.doc_id = doc.doc_id;
    h.site = doc.site;
    h.snippet = std::string(text::utf8_prefix(para.text, kSnippetCodePoints));
    h.relevance = sp.score;
    h.authoritative = authority_.is_authoritative(doc.site);
    hits.push_back(std::move(h));
  }
  rank_hits(hits, authority_.boost, ranking_);
  if (hits.size() > params.k) hits.resize(params.k);
  return hits;
}

QueryCache::QueryCache(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw Error(ErrorCode::kInvalidArgument, "cache capacity must be positive");
}

std::optional<std::vector<SearchHit>> QueryCache::lookup(const std::string& key) {
  std::lock_guard lock(mu_);
  auto it = map_.find(key);
  if (it == map_.end()) return std::nullopt;
  order_.splice(order_.begin(), order_, it->second);
  return it->second->second;
}

void QueryCache::insert(const std::string& key, std::vector<SearchHit> hits) {
  std::lock_guard lock(mu_);
  if (auto it = map_.find(key); it != map_.end()) {
    it->second->second = std::move(hits);
    order_.splice(order_.begin(), order_, it->second);
    return;
  }
  order_.emplace_front(key, std::move(hits));
  map_[key] = order_.begin();
  if (order_.size() > capacity_) {
    map_.erase(order_.back().first);
    order_.pop_back();
  }
}

std::size_t QueryCache::size() const {
  std::lock_guard lock(mu_);
  return order_.size();
}

bool SearchBudget::try_consume() {
  auto cur = remaining_.load();
  while (cur > 0) {
    if (remaining_.compare_exchange_weak(cur, cur - 1)) {
      used_.fetch_add(1);
      return true;
    }
  }
  return false;
}

std::vector<SearchHit> search(std::string_view query, SearchBackend& backend, QueryCache& cache,
                              SearchBudget& budget, const SearchParams& params) {
  if (params.k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
  const auto normalized = normalize_query(query);
  const auto key = params.cache_key(normalized);
  if (auto cached = cache.lookup(key)) return std::move(*cached);
  if (!budget.try_consume()) {
    throw Error(ErrorCode::kBudgetExhausted,
                fmt::format("search budget exhausted after {} backend calls", budget.used()));
  }
  auto hits = backend.search(normalized, params);
  cache.insert(key, hits);
  return hits;
}

SearchService::SearchService(std::shared_ptr<SearchBackend> backend, std::size_t budget,
                             std::size_t cache_capacity)
    : backend_(std::move(backend)), cache_(cache_capacity), budget_(budget) {
  if (!backend_) throw Error(ErrorCode::kInvalidArgument, "search service needs a backend");
}

std::vector<SearchHit> SearchService::search(std::string_view query, const SearchParams& params) {
  return retrieval::search(query, *backend_, cache_, budget_, params);
}

}  // namespace dr::retrieval
