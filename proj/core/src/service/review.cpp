#include "dr/service/review.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "dr/error.hpp"
#include "dr/text.hpp"

namespace dr::service {

namespace fs = std::filesystem;
using eval::Pairing;
using eval::PairwiseRecord;

namespace {

std::string mode_name(eval::PairingMode m) {
  return m == eval::PairingMode::kRoundRobin ? "round_robin" : "one_vs_rest";
}

eval::PairingMode parse_mode(const std::string& s) {
  if (s == "round_robin") return eval::PairingMode::kRoundRobin;
  if (s == "one_vs_rest") return eval::PairingMode::kOneVsRest;
  throw Error(ErrorCode::kInvalidArgument, "unknown pairing mode '" + s + "'");
}

template <typename F>
auto json_guard(const char* what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("{}: {}", what, e.what()));
  }
}

}  // namespace

SessionSpec session_spec_from_json(const Json& j) {
  return json_guard("session", [&] {
    SessionSpec s;
    s.systems = j.at("systems").get<std::vector<std::string>>();
    for (const auto& q : j.at("queries")) {
      if (q.is_string()) {
        s.queries.push_back({q.get<std::string>(), q.get<std::string>()});
      } else {
        s.queries.push_back({q.at("id").get<std::string>(), q.value("text", q.at("id").get<std::string>())});
      }
    }
    for (const auto& r : j.value("reports", Json::array())) {
      s.reports[{r.at("system").get<std::string>(), r.at("query_id").get<std::string>()}] =
          r.at("text").get<std::string>();
    }
    s.mode = parse_mode(j.value("mode", std::string("round_robin")));
    s.subject = j.value("subject", std::string{});
    s.seed = j.value("seed", std::uint64_t{0});
    s.k_factor = j.value("k_factor", eval::kDefaultK);
    if (s.systems.size() < 2) throw Error(ErrorCode::kInvalidArgument, "a session needs at least two systems");
    if (s.queries.empty()) throw Error(ErrorCode::kInvalidArgument, "a session needs at least one query");
    std::set<std::string> qids;
    for (const auto& q : s.queries) {
      if (!qids.insert(q.query_id).second) {
        throw Error(ErrorCode::kInvalidArgument, "duplicate query id " + q.query_id);
      }
    }
    return s;
  });
}

Json to_json(const SessionSpec& s) {
  Json queries = Json::array();
  for (const auto& q : s.queries) queries.push_back({{"id", q.query_id}, {"text", q.text}});
  Json reports = Json::array();
  for (const auto& [key, text] : s.reports) {
    reports.push_back({{"system", key.first}, {"query_id", key.second}, {"text", text}});
  }
  return {{"systems", s.systems}, {"queries", queries}, {"reports", reports},
          {"mode", mode_name(s.mode)}, {"subject", s.subject}, {"seed", s.seed},
          {"k_factor", s.k_factor}};
}

Json to_json(const BlindPair& p) {
  return {{"pair_id", p.pair_id},
          {"query_id", p.query_id},
          {"query", p.query},
          {"left_report", p.left_report},
          {"right_report", p.right_report},
          {"lease_expires", format_rfc3339(p.lease_expires)}};
}

Submission submission_from_json(const Json& j) {
  return json_guard("verdict", [&] {
    Submission s;
    s.pair_id = j.at("pair_id").get<std::string>();
    s.reviewer_id = j.at("reviewer_id").get<std::string>();
    s.verdict = eval::parse_pair_verdict(j.at("verdict").get<std::string>());
    if (!j.contains("sub_scores")) throw Error(ErrorCode::kInvalidArgument, "missing sub_scores");
    s.sub_scores = eval::sub_scores_from_json(j.at("sub_scores"));
    s.justification = j.value("justification", std::string{});
    if (text::trim(s.justification).empty()) {
      throw Error(ErrorCode::kInvalidArgument, "justification must not be empty");
    }
    if (s.reviewer_id.empty()) throw Error(ErrorCode::kInvalidArgument, "reviewer_id must not be empty");
    return s;
  });
}

Json to_json(const LeaderboardSnapshot& s) {
  Json rows = Json::array();
  for (const auto& r : s.rows) rows.push_back(eval::to_json(r));
  return {{"systems", rows}, {"completed", s.completed}, {"queued", s.queued}, {"progress", s.progress()}};
}

struct ReviewService::Session {
  std::string id;
  SessionSpec spec;
  std::vector<Pairing> pairings;
  std::map<std::string, std::size_t> index;  // pair_id -> pairing index
  std::map<std::size_t, std::pair<std::string, Timestamp>> leases;
  std::map<std::size_t, std::string> completed_by;
  std::vector<PairwiseRecord> records;
  std::unique_ptr<JsonlAppender> log;
  mutable std::mutex mu;

  std::string query_text(const std::string& qid) const {
    for (const auto& q : spec.queries) {
      if (q.query_id == qid) return q.text;
    }
    return qid;
  }

  BlindPair blind(std::size_t i, Timestamp expiry) const {
    const auto& p = pairings[i];
    return {p.pair_id, p.query_id, query_text(p.query_id), spec.reports.at({p.left_system, p.query_id}),
            spec.reports.at({p.right_system, p.query_id}), expiry};
  }
};

ReviewService::ReviewService(fs::path data_dir, ServiceOptions options)
    : data_dir_(std::move(data_dir)), options_(std::move(options)) {
  if (!options_.clock) options_.clock = system_clock();
  std::error_code ec;
  fs::create_directories(data_dir_, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + data_dir_.string() + ": " + ec.message());
  load_existing();
}

ReviewService::~ReviewService() = default;

void ReviewService::load_existing() {
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(data_dir_)) {
    if (entry.is_directory() && fs::exists(entry.path() / "session.json")) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    const auto meta = read_json_file(dir / "session.json");
    auto s = std::make_unique<Session>();
    s->id = meta.at("session_id").get<std::string>();
    s->spec = session_spec_from_json(meta.at("spec"));
    for (const auto& p : meta.at("pairings")) s->pairings.push_back(eval::pairing_from_json(p));
    for (std::size_t i = 0; i < s->pairings.size(); ++i) s->index[s->pairings[i].pair_id] = i;
    const auto log_path = dir / "records.jsonl";
    if (fs::exists(log_path)) {
      const auto lines = text::split_lines(read_file(log_path));
      for (std::size_t i = 0; i < lines.size(); ++i) {
        if (text::trim(lines[i]).empty()) continue;
        const auto row = Json::parse(lines[i], nullptr, false);
        if (row.is_discarded()) {
          // Only a torn final line from an interrupted append is tolerated.
          if (i + 1 == lines.size()) break;
          throw Error(ErrorCode::kParse, fmt::format("{}:{}: corrupt record", log_path.string(), i + 1));
        }
        auto rec = eval::record_from_json(row);
        auto it = s->index.find(rec.pair_id);
        if (it == s->index.end()) {
          throw Error(ErrorCode::kParse, "record for unknown pairing " + rec.pair_id);
        }
        s->completed_by[it->second] = rec.reviewer_id;
        s->records.push_back(std::move(rec));
      }
    }
    s->log = std::make_unique<JsonlAppender>(log_path);
    sessions_[s->id] = std::move(s);
  }
}

std::string ReviewService::create_session(const SessionSpec& spec) {
  std::vector<std::string> qids;
  for (const auto& q : spec.queries) qids.push_back(q.query_id);
  auto pairings = eval::schedule_pairings(spec.systems, qids, spec.mode, spec.subject, spec.seed);
  // Only the (system, query) reports the schedule touches are required.
  std::set<std::pair<std::string, std::string>> missing;
  for (const auto& p : pairings) {
    for (const auto& sys : {p.left_system, p.right_system}) {
      if (!spec.reports.count({sys, p.query_id})) missing.insert({sys, p.query_id});
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& [sys, q] : missing) list += fmt::format("{}({}, {})", list.empty() ? "" : "; ", sys, q);
    throw Error(ErrorCode::kMissingReport, "missing reports: " + list);
  }
  (void)eval::EloTable(spec.k_factor);  // validates K

  std::lock_guard lock(sessions_mu_);
  std::string id;
  for (std::size_t n = sessions_.size() + 1;; ++n) {
    id = fmt::format("s{:04d}", n);
    if (!sessions_.count(id) && !fs::exists(data_dir_ / id)) break;
  }
  const auto dir = data_dir_ / id;
  fs::create_directories(dir);
  Json pj = Json::array();
  for (const auto& p : pairings) pj.push_back(eval::to_json(p));
  write_file_atomic(dir / "session.json",
                    Json{{"session_id", id}, {"spec", to_json(spec)}, {"pairings", pj},
                         {"created", format_rfc3339(options_.clock())}}
                        .dump(2));
  auto s = std::make_unique<Session>();
  s->id = id;
  s->spec = spec;
  s->pairings = std::move(pairings);
  for (std::size_t i = 0; i < s->pairings.size(); ++i) s->index[s->pairings[i].pair_id] = i;
  s->log = std::make_unique<JsonlAppender>(dir / "records.jsonl");
  sessions_[id] = std::move(s);
  return id;
}

ReviewService::Session& ReviewService::find(const std::string& id) const {
  std::lock_guard lock(sessions_mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::kNotFound, "unknown session " + id);
  return *it->second;
}

std::optional<BlindPair> ReviewService::next_pair(const std::string& session_id, const std::string& reviewer_id) {
  if (reviewer_id.empty()) throw Error(ErrorCode::kInvalidArgument, "reviewer id must not be empty");
  auto& s = find(session_id);
  std::lock_guard lock(s.mu);
  const auto now = options_.clock();
  for (const auto& [i, lease] : s.leases) {
    if (lease.first == reviewer_id && lease.second > now) return s.blind(i, lease.second);
  }
  for (std::size_t i = 0; i < s.pairings.size(); ++i) {
    if (s.completed_by.count(i)) continue;
    auto it = s.leases.find(i);
    if (it != s.leases.end() && it->second.second > now) continue;
    const auto expiry = now + options_.lease_duration;
    s.leases[i] = {reviewer_id, expiry};
    return s.blind(i, expiry);
  }
  return std::nullopt;
}

SubmitResult ReviewService::submit_verdict(const std::string& session_id, const Submission& sub) {
  auto& s = find(session_id);
  std::lock_guard lock(s.mu);
  auto it = s.index.find(sub.pair_id);
  if (it == s.index.end()) throw Error(ErrorCode::kNotFound, "unknown pairing " + sub.pair_id);
  const std::size_t i = it->second;
  if (auto done = s.completed_by.find(i); done != s.completed_by.end()) {
    if (done->second != sub.reviewer_id) {
      throw Error(ErrorCode::kConflict, sub.pair_id + " was already judged by another reviewer");
    }
    for (const auto& r : s.records) {
      if (r.pair_id == sub.pair_id) return {true, r};
    }
  }
  const auto now = options_.clock();
  auto lease = s.leases.find(i);
  if (lease == s.leases.end() || lease->second.first != sub.reviewer_id || lease->second.second <= now) {
    throw Error(ErrorCode::kLeaseExpired,
                fmt::format("{} holds no live lease on {}", sub.reviewer_id, sub.pair_id));
  }
  const auto& p = s.pairings[i];
  PairwiseRecord rec{p.pair_id,          p.query_id,        p.left_system,     p.right_system,
                     sub.verdict,        sub.sub_scores,    sub.justification, sub.reviewer_id,
                     p.side_order_seed,  now};
  s.log->append(eval::to_json(rec));  // durable before the state changes
  s.records.push_back(rec);
  s.completed_by[i] = sub.reviewer_id;
  s.leases.erase(lease);
  return {false, std::move(rec)};
}

LeaderboardSnapshot ReviewService::leaderboard_snapshot(const std::string& session_id) const {
  auto& s = find(session_id);
  std::lock_guard lock(s.mu);
  LeaderboardSnapshot snap;
  snap.rows = eval::leaderboard(s.spec.systems, s.records, s.spec.k_factor);
  snap.completed = s.completed_by.size();
  snap.queued = s.pairings.size();
  return snap;
}

std::string ReviewService::export_records(const std::string& session_id) const {
  std::string out;
  for (const auto& r : records(session_id)) out += eval::to_json(r).dump() + "\n";
  return out;
}

std::vector<PairwiseRecord> ReviewService::records(const std::string& session_id) const {
  auto& s = find(session_id);
  std::lock_guard lock(s.mu);
  return s.records;
}

std::vector<Pairing> ReviewService::pairings(const std::string& session_id) const {
  auto& s = find(session_id);
  std::lock_guard lock(s.mu);
  return s.pairings;
}

std::vector<std::string> ReviewService::session_ids() const {
  std::lock_guard lock(sessions_mu_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : sessions_) ids.push_back(id);
  return ids;
}

std::map<std::string, std::string> load_reviewer_tokens(const fs::path& path) {
  std::map<std::string, std::string> tokens;
  std::size_t n = 0;
  for (const auto& line : text::split_lines(read_file(path))) {
    ++n;
    const auto t = text::trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::istringstream in(t);
    std::string reviewer, token, extra;
    if (!(in >> reviewer >> token) || (in >> extra)) {
      throw Error(ErrorCode::kParse, fmt::format("{}:{}: expected 'reviewer_id token'", path.string(), n));
    }
    tokens[reviewer] = token;
  }
  return tokens;
}

}  // namespace dr::service
