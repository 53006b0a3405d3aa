#include "dr/retrieval/index.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "dr/error.hpp"
#include "dr/jsonl.hpp"
#include "dr/text.hpp"

namespace dr::retrieval {

namespace fs = std::filesystem;

namespace {

const std::vector<Posting> kNoPostings;

bool blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
  });
}

Document document_from_json(const Json& row) {
  Document d;
  d.doc_id = row.at("doc_id").get<std::string>();
  d.site = row.value("site", std::string{});
  d.text = row.at("text").get<std::string>();
  if (auto it = row.find("published"); it != row.end() && it->is_string()) {
    d.published = parse_rfc3339(it->get<std::string>());
  }
  return d;
}

Json document_to_json(const Document& d) {
  Json j{{"doc_id", d.doc_id}, {"site", d.site}, {"text", d.text}};
  if (d.published) j["published"] = format_rfc3339(*d.published);
  return j;
}

}  // namespace

std::vector<std::string> split_paragraphs(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    auto t = text::trim(cur);
    if (!t.empty()) out.push_back(std::move(t));
    cur.clear();
  };
  for (const auto& line : text::split_lines(text)) {
    if (blank(line)) {
      flush();
    } else {
      if (!cur.empty()) cur.push_back('\n');
      cur += line;
    }
  }
  flush();
  return out;
}

const std::vector<Posting>& ParagraphIndex::postings(const std::string& term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? kNoPostings : it->second;
}

std::vector<ScoredParagraph> ParagraphIndex::score(std::string_view query, Bm25Params params) const {
  std::vector<std::string> terms = text::tokenize(query);
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());

  const auto n = static_cast<double>(paragraphs_.size());
  std::vector<double> acc;
  std::vector<std::uint32_t> touched;
  for (const auto& term : terms) {
    const auto& plist = postings(term);
    if (plist.empty()) continue;
    const auto df = static_cast<double>(plist.size());
    const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    for (const auto& p : plist) {
      const auto tf = static_cast<double>(p.term_frequency);
      const auto len = static_cast<double>(paragraphs_[p.paragraph].length);
      const double norm = params.k1 * (1.0 - params.b + params.b * len / avg_length_);
      if (acc.empty()) acc.assign(paragraphs_.size(), -1.0);
      double& slot = acc[p.paragraph];
      if (slot < 0.0) {
        slot = 0.0;
        touched.push_back(p.paragraph);
      }
      slot += idf * tf * (params.k1 + 1.0) / (tf + norm);
    }
  }
  std::vector<ScoredParagraph> out;
  std::sort(touched.begin(), touched.end());
  out.reserve(touched.size());
  for (const auto para : touched) out.push_back({para, acc[para]});
  return out;
}

Json ParagraphIndex::to_json() const {
  Json docs = Json::array();
  for (const auto& d : documents_) docs.push_back(document_to_json(d));
  return Json{{"documents", std::move(docs)},
              {"paragraphs", paragraphs_.size()},
              {"terms", postings_.size()}};
}

ParagraphIndex build_index(std::vector<Document> corpus) {
  ParagraphIndex idx;
  std::set<std::string> seen;
  std::size_t total_len = 0;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    if (!seen.insert(corpus[d].doc_id).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate doc_id: " + corpus[d].doc_id);
    }
    std::size_t n = 0;
    for (auto& para : split_paragraphs(corpus[d].text)) {
      const auto tokens = text::tokenize(para);
      const auto pid = static_cast<std::uint32_t>(idx.paragraphs_.size());
      std::map<std::string, std::uint32_t> tf;
      for (const auto& t : tokens) ++tf[t];
      for (const auto& [term, count] : tf) idx.postings_[term].push_back({pid, count});
      total_len += tokens.size();
      idx.paragraphs_.push_back(
          {corpus[d].doc_id + "#p" + std::to_string(++n), d, std::move(para), tokens.size()});
    }
  }
  idx.avg_length_ = idx.paragraphs_.empty()
                        ? 0.0
                        : static_cast<double>(total_len) / static_cast<double>(idx.paragraphs_.size());
  if (idx.avg_length_ == 0.0) idx.avg_length_ = 1.0;
  idx.documents_ = std::move(corpus);
  return idx;
}

ParagraphIndex index_from_json(const Json& j) {
  std::vector<Document> docs;
  for (const auto& row : j.at("documents")) docs.push_back(document_from_json(row));
  return build_index(std::move(docs));
}

std::vector<Document> load_corpus(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::kNotFound, "corpus not found: " + path.string());
  std::vector<Document> docs;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      const auto ext = entry.path().extension();
      if (entry.is_regular_file() && (ext == ".txt" || ext == ".md")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) docs.push_back({f.stem().string(), "local", read_file(f), std::nullopt});
    return docs;
  }
  if (path.extension() == ".json") {
    for (const auto& row : read_json_file(path).at("documents")) docs.push_back(document_from_json(row));
    return docs;
  }
  for (const auto& row : read_jsonl(path)) docs.push_back(document_from_json(row));
  return docs;
}

}  // namespace dr::retrieval
