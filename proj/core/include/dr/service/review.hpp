#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dr/eval/elo.hpp"
#include "dr/jsonl.hpp"
#include "dr/time.hpp"

namespace dr::service {

struct QuerySpec {
  std::string query_id;
  std::string text;
};

struct SessionSpec {
  std::vector<std::string> systems;
  std::vector<QuerySpec> queries;
  std::map<std::pair<std::string, std::string>, std::string> reports;  // (system, query_id) -> text
  eval::PairingMode mode = eval::PairingMode::kRoundRobin;
  std::string subject;
  std::uint64_t seed = 0;
  double k_factor = eval::kDefaultK;
};

/// Throws dr::Error(kInvalidArgument/kParse) on malformed input.
SessionSpec session_spec_from_json(const Json& j);
Json to_json(const SessionSpec& s);

/// What a reviewer sees: no system identifiers.
struct BlindPair {
  std::string pair_id;
  std::string query_id;
  std::string query;
  std::string left_report;
  std::string right_report;
  Timestamp lease_expires{};
};

Json to_json(const BlindPair& p);

struct Submission {
  std::string pair_id;
  std::string reviewer_id;
  eval::PairVerdict verdict = eval::PairVerdict::kBothFair;
  eval::SubScores sub_scores;
  std::string justification;
};

/// Validates verdict, all four sub-scores and a nonempty justification.
Submission submission_from_json(const Json& j);

struct SubmitResult {
  bool duplicate = false;
  eval::PairwiseRecord record;
};

struct LeaderboardSnapshot {
  std::vector<eval::LeaderboardRow> rows;
  std::size_t completed = 0;
  std::size_t queued = 0;

  double progress() const { return queued == 0 ? 1.0 : static_cast<double>(completed) / queued; }
};

Json to_json(const LeaderboardSnapshot& s);

struct ServiceOptions {
  std::chrono::seconds lease_duration{std::chrono::minutes(30)};
  Clock clock = system_clock();
};

/// Blind pairwise review sessions. Each session lives in
/// <data_dir>/<session_id>/ as session.json plus an append-only
/// records.jsonl; state is rebuilt from those files on construction.
class ReviewService {
 public:
  explicit ReviewService(std::filesystem::path data_dir, ServiceOptions options = {});
  ~ReviewService();
  ReviewService(const ReviewService&) = delete;
  ReviewService& operator=(const ReviewService&) = delete;

  /// Throws dr::Error(kMissingReport) listing every absent (system, query).
  std::string create_session(const SessionSpec& spec);

  /// Hands out the reviewer's live lease again if one exists, otherwise the
  /// first pairing that is neither completed nor leased. nullopt when none
  /// remain. Throws dr::Error(kNotFound) for an unknown session.
  std::optional<BlindPair> next_pair(const std::string& session_id, const std::string& reviewer_id);

  /// Requires the reviewer's live lease. A retry of an accepted submission by
  /// the same reviewer returns duplicate = true and changes nothing.
  /// Throws kLeaseExpired, kConflict or kNotFound.
  SubmitResult submit_verdict(const std::string& session_id, const Submission& submission);

  LeaderboardSnapshot leaderboard_snapshot(const std::string& session_id) const;

  /// The record log as JSON Lines, in acceptance order.
  std::string export_records(const std::string& session_id) const;
  std::vector<eval::PairwiseRecord> records(const std::string& session_id) const;
  std::vector<eval::Pairing> pairings(const std::string& session_id) const;
  std::vector<std::string> session_ids() const;

 private:
  struct Session;
  Session& find(const std::string& id) const;
  void load_existing();

  std::filesystem::path data_dir_;
  ServiceOptions options_;
  mutable std::mutex sessions_mu_;
  std::map<std::string, std::unique_ptr<Session>> sessions_;
};

/// reviewer_id -> bearer token, from lines "reviewer_id token" ('#' comments).
std::map<std::string, std::string> load_reviewer_tokens(const std::filesystem::path& path);

struct HttpOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 binds an ephemeral port
  std::filesystem::path static_dir;  // served at / when set
  std::map<std::string, std::string> reviewer_tokens;  // empty disables auth
};

/// JSON API over a ReviewService.
class ReviewHttpServer {
 public:
  ReviewHttpServer(ReviewService& service, HttpOptions options);
  ~ReviewHttpServer();
  ReviewHttpServer(const ReviewHttpServer&) = delete;
  ReviewHttpServer& operator=(const ReviewHttpServer&) = delete;

  /// Binds the socket and returns the bound port. Throws dr::Error(kIo).
  int bind();
  /// Serves until stop(); call bind() first.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace dr::service
