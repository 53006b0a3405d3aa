#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dr/jsonl.hpp"
#include "dr/time.hpp"

namespace dr::eval {

enum class PairVerdict { kLeftBetter, kRightBetter, kBothGood, kBothFair, kBothPoor };

std::string_view to_string(PairVerdict v);
/// Throws dr::Error(kUnknownVerdict).
PairVerdict parse_pair_verdict(std::string_view s);

/// The four review dimensions, in canonical order.
inline constexpr std::string_view kSubDimensions[] = {"information_completeness", "content_depth",
                                                     "requirement_fitness", "readability"};

/// Comparative 5-point ordinal per dimension: 1 strongly favors the left
/// report, 3 is even, 5 strongly favors the right.
struct SubScores {
  int information_completeness = 3;
  int content_depth = 3;
  int requirement_fitness = 3;
  int readability = 3;

  int get(std::string_view dimension) const;
  bool operator==(const SubScores&) const = default;
};

/// Throws dr::Error(kInvalidArgument) naming a missing or out-of-range
/// dimension.
SubScores sub_scores_from_json(const Json& j);
Json to_json(const SubScores& s);

struct Pairing {
  std::string pair_id;
  std::string query_id;
  std::string left_system;
  std::string right_system;
  std::uint64_t side_order_seed = 0;

  bool operator==(const Pairing&) const = default;
};

struct PairwiseRecord {
  std::string pair_id;
  std::string query_id;
  std::string left_system;
  std::string right_system;
  PairVerdict verdict = PairVerdict::kBothFair;
  SubScores sub_scores;
  std::string justification;
  std::string reviewer_id;
  std::uint64_t side_order_seed = 0;
  Timestamp timestamp{};
};

Json to_json(const PairwiseRecord& r);
PairwiseRecord record_from_json(const Json& j);

enum class PairingMode { kRoundRobin, kOneVsRest };

/// Round robin: every unordered system pair per query. One-vs-rest: the
/// subject against each other system per query. The left/right order of each
/// pairing is drawn from the stream seeded by (seed, pairing index).
std::vector<Pairing> schedule_pairings(const std::vector<std::string>& systems,
                                       const std::vector<std::string>& query_ids, PairingMode mode,
                                       const std::string& subject = {}, std::uint64_t seed = 0);

Json to_json(const Pairing& p);
Pairing pairing_from_json(const Json& j);

inline constexpr double kDefaultK = 32.0;
inline constexpr double kInitialRating = 1500.0;

/// Logistic expected score of a against b on the 400-point base-10 scale.
double expected_score(double rating_a, double rating_b);

/// Nearest multiple of 2^-32 (ties to even).
double quantize_rating(double x);

/// Left system's actual score: 1, 0 or 0.5 for any "both" verdict.
double left_score(PairVerdict v);

class EloTable {
 public:
  explicit EloTable(double k_factor = kDefaultK, double initial = kInitialRating);

  double k_factor() const { return k_; }
  double initial_rating() const { return initial_; }
  /// Unrated systems read as the initial rating.
  double rating(const std::string& system) const;
  const std::map<std::string, double>& ratings() const { return ratings_; }
  const std::vector<std::string>& history() const { return history_; }

  void ensure(const std::string& system);
  void apply(const PairwiseRecord& record);

 private:
  double k_;
  double initial_;
  std::map<std::string, double> ratings_;
  std::vector<std::string> history_;  // pair ids in application order
};

/// Functional form of EloTable::apply.
EloTable elo_update(EloTable table, const PairwiseRecord& record);

struct LeaderboardRow {
  std::string system;
  double rating = kInitialRating;
  std::size_t wins = 0;
  std::size_t ties = 0;
  std::size_t losses = 0;
  std::size_t both_good = 0;
  std::size_t both_fair = 0;
  std::size_t both_poor = 0;

  bool operator==(const LeaderboardRow&) const = default;
};

/// Records are replayed in timestamp order (stable, so log order breaks
/// ties). `systems` lists entrants that should appear even without records.
/// Rows are ordered by rating descending, then name.
std::vector<LeaderboardRow> leaderboard(const std::vector<std::string>& systems,
                                        const std::vector<PairwiseRecord>& records,
                                        double k_factor = kDefaultK, double initial = kInitialRating);

/// "rank,system,rating,wins,ties,losses,both_good,both_fair,both_poor",
/// ratings with six decimals.
std::string leaderboard_csv(const std::vector<LeaderboardRow>& rows);
Json to_json(const LeaderboardRow& row);

struct DimensionTally {
  std::size_t favored = 0;
  std::size_t even = 0;
  std::size_t disfavored = 0;

  bool operator==(const DimensionTally&) const = default;
};

/// Per system and dimension, how often the comparative ordinal favored it.
std::map<std::string, std::map<std::string, DimensionTally>> dimension_tallies(
    const std::vector<PairwiseRecord>& records);

}  // namespace dr::eval
