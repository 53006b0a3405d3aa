#include "dr/eval/elo.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "dr/error.hpp"
#include "dr/eval/scoring.hpp"
#include "dr/random.hpp"

namespace dr::eval {

std::string_view to_string(PairVerdict v) {
  switch (v) {
    case PairVerdict::kLeftBetter: return "left_better";
    case PairVerdict::kRightBetter: return "right_better";
    case PairVerdict::kBothGood: return "both_good";
    case PairVerdict::kBothFair: return "both_fair";
    case PairVerdict::kBothPoor: return "both_poor";
  }
  return "unknown";
}

PairVerdict parse_pair_verdict(std::string_view s) {
  for (auto v : {PairVerdict::kLeftBetter, PairVerdict::kRightBetter, PairVerdict::kBothGood,
                 PairVerdict::kBothFair, PairVerdict::kBothPoor}) {
    if (to_string(v) == s) return v;
  }
  throw Error(ErrorCode::kUnknownVerdict, fmt::format("unknown verdict '{}'", s));
}

int SubScores::get(std::string_view dimension) const {
  if (dimension == "information_completeness") return information_completeness;
  if (dimension == "content_depth") return content_depth;
  if (dimension == "requirement_fitness") return requirement_fitness;
  if (dimension == "readability") return readability;
  throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown dimension '{}'", dimension));
}

SubScores sub_scores_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "sub_scores must be an object");
  auto read = [&j](std::string_view name) {
    const std::string key(name);
    if (!j.contains(key)) throw Error(ErrorCode::kInvalidArgument, "missing sub-score " + key);
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<int>() < 1 || v.get<int>() > 5) {
      throw Error(ErrorCode::kInvalidArgument, "sub-score " + key + " must be an integer in [1, 5]");
    }
    return v.get<int>();
  };
  SubScores s;
  s.information_completeness = read("information_completeness");
  s.content_depth = read("content_depth");
  s.requirement_fitness = read("requirement_fitness");
  s.readability = read("readability");
  return s;
}

Json to_json(const SubScores& s) {
  return {{"information_completeness", s.information_completeness},
          {"content_depth", s.content_depth},
          {"requirement_fitness", s.requirement_fitness},
          {"readability", s.readability}};
}

Json to_json(const PairwiseRecord& r) {
  return {{"pair_id", r.pair_id},
          {"query_id", r.query_id},
          {"left_system", r.left_system},
          {"right_system", r.right_system},
          {"verdict", std::string(to_string(r.verdict))},
          {"sub_scores", to_json(r.sub_scores)},
          {"justification", r.justification},
          {"reviewer_id", r.reviewer_id},
          {"side_order_seed", r.side_order_seed},
          {"timestamp", format_rfc3339(r.timestamp)}};
}

PairwiseRecord record_from_json(const Json& j) {
  try {
    PairwiseRecord r;
    r.pair_id = j.at("pair_id").get<std::string>();
    r.query_id = j.at("query_id").get<std::string>();
    r.left_system = j.at("left_system").get<std::string>();
    r.right_system = j.at("right_system").get<std::string>();
    r.verdict = parse_pair_verdict(j.at("verdict").get<std::string>());
    r.sub_scores = sub_scores_from_json(j.at("sub_scores"));
    r.justification = j.value("justification", std::string{});
    r.reviewer_id = j.value("reviewer_id", std::string{});
    r.side_order_seed = j.value("side_order_seed", std::uint64_t{0});
    r.timestamp = parse_rfc3339(j.at("timestamp").get<std::string>());
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("pairwise record: ") + e.what());
  }
}

std::vector<Pairing> schedule_pairings(const std::vector<std::string>& systems,
                                       const std::vector<std::string>& query_ids, PairingMode mode,
                                       const std::string& subject, std::uint64_t seed) {
  {
    auto sorted = systems;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate system name");
    }
  }
  if (mode == PairingMode::kOneVsRest &&
      std::find(systems.begin(), systems.end(), subject) == systems.end()) {
    throw Error(ErrorCode::kInvalidArgument, "subject '" + subject + "' is not among the systems");
  }
  std::vector<std::pair<std::string, std::string>> matchups;
  if (mode == PairingMode::kRoundRobin) {
    for (std::size_t i = 0; i < systems.size(); ++i) {
      for (std::size_t j = i + 1; j < systems.size(); ++j) matchups.emplace_back(systems[i], systems[j]);
    }
  } else {
    for (const auto& s : systems) {
      if (s != subject) matchups.emplace_back(subject, s);
    }
  }
  std::vector<Pairing> out;
  out.reserve(matchups.size() * query_ids.size());
  for (const auto& q : query_ids) {
    for (const auto& [a, b] : matchups) {
      const std::uint64_t idx = out.size();
      const std::uint64_t side_seed = stream_seed(seed, idx);
      Rng rng(side_seed);
      const bool swap = uniform_index(rng, 2) == 1;
      out.push_back({fmt::format("p{:04d}", idx + 1), q, swap ? b : a, swap ? a : b, side_seed});
    }
  }
  return out;
}

Json to_json(const Pairing& p) {
  return {{"pair_id", p.pair_id},
          {"query_id", p.query_id},
          {"left_system", p.left_system},
          {"right_system", p.right_system},
          {"side_order_seed", p.side_order_seed}};
}

Pairing pairing_from_json(const Json& j) {
  try {
    return {j.at("pair_id").get<std::string>(), j.at("query_id").get<std::string>(),
            j.at("left_system").get<std::string>(), j.at("right_system").get<std::string>(),
            j.value("side_order_seed", std::uint64_t{0})};
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("pairing: ") + e.what());
  }
}

double expected_score(double rating_a, double rating_b) {
  return 1.0 / (1.0 + std::pow(10.0, (rating_b - rating_a) / 400.0));
}

double left_score(PairVerdict v) {
  switch (v) {
    case PairVerdict::kLeftBetter: return 1.0;
    case PairVerdict::kRightBetter: return 0.0;
    default: return 0.5;
  }
}

double quantize_rating(double x) { return std::ldexp(std::nearbyint(std::ldexp(x, 32)), -32); }

EloTable::EloTable(double k_factor, double initial) : k_(k_factor), initial_(quantize_rating(initial)) {
  if (!(k_factor > 0.0) || !std::isfinite(k_factor)) {
    throw Error(ErrorCode::kInvalidArgument, "K factor must be positive");
  }
}

double EloTable::rating(const std::string& system) const {
  auto it = ratings_.find(system);
  return it == ratings_.end() ? initial_ : it->second;
}

void EloTable::ensure(const std::string& system) { ratings_.try_emplace(system, initial_); }

void EloTable::apply(const PairwiseRecord& record) {
  if (record.left_system == record.right_system) {
    throw Error(ErrorCode::kInvalidArgument, "a system cannot be compared with itself");
  }
  ensure(record.left_system);
  ensure(record.right_system);
  double& ra = ratings_[record.left_system];
  double& rb = ratings_[record.right_system];
  const double ea = expected_score(ra, rb);
  // The delta is snapped to the 2^-32 grid. Ratings then stay on that grid,
  // so adding and subtracting it is exact in binary floating point and the
  // rating sum is conserved bit for bit.
  const double delta = quantize_rating(k_ * (left_score(record.verdict) - ea));
  ra += delta;
  rb -= delta;
  history_.push_back(record.pair_id);
}

EloTable elo_update(EloTable table, const PairwiseRecord& record) {
  table.apply(record);
  return table;
}

std::vector<LeaderboardRow> leaderboard(const std::vector<std::string>& systems,
                                        const std::vector<PairwiseRecord>& records, double k_factor,
                                        double initial) {
  std::vector<const PairwiseRecord*> order;
  order.reserve(records.size());
  for (const auto& r : records) order.push_back(&r);
  std::stable_sort(order.begin(), order.end(),
                   [](const auto* a, const auto* b) { return a->timestamp < b->timestamp; });

  EloTable table(k_factor, initial);
  std::map<std::string, LeaderboardRow> rows;
  for (const auto& s : systems) {
    table.ensure(s);
    rows[s].system = s;
  }
  for (const auto* r : order) {
    table.apply(*r);
    auto& l = rows[r->left_system];
    auto& rr = rows[r->right_system];
    l.system = r->left_system;
    rr.system = r->right_system;
    switch (r->verdict) {
      case PairVerdict::kLeftBetter: ++l.wins; ++rr.losses; break;
      case PairVerdict::kRightBetter: ++rr.wins; ++l.losses; break;
      case PairVerdict::kBothGood: ++l.ties; ++rr.ties; ++l.both_good; ++rr.both_good; break;
      case PairVerdict::kBothFair: ++l.ties; ++rr.ties; ++l.both_fair; ++rr.both_fair; break;
      case PairVerdict::kBothPoor: ++l.ties; ++rr.ties; ++l.both_poor; ++rr.both_poor; break;
    }
  }
  std::vector<LeaderboardRow> out;
  out.reserve(rows.size());
  for (auto& [name, row] : rows) {
    row.rating = table.rating(name);
    out.push_back(row);
  }
  std::stable_sort(out.begin(), out.end(), [](const LeaderboardRow& a, const LeaderboardRow& b) {
    if (a.rating != b.rating) return a.rating > b.rating;
    return a.system < b.system;
  });
  return out;
}

std::string leaderboard_csv(const std::vector<LeaderboardRow>& rows) {
  std::string out = "rank,system,rating,wins,ties,losses,both_good,both_fair,both_poor\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out += fmt::format("{},{},{:.6f},{},{},{},{},{},{}\n", i + 1, csv_field(r.system), r.rating, r.wins,
                       r.ties, r.losses, r.both_good, r.both_fair, r.both_poor);
  }
  return out;
}

Json to_json(const LeaderboardRow& row) {
  return {{"system", row.system},         {"rating", row.rating},       {"wins", row.wins},
          {"ties", row.ties},             {"losses", row.losses},       {"both_good", row.both_good},
          {"both_fair", row.both_fair},   {"both_poor", row.both_poor}};
}

std::map<std::string, std::map<std::string, DimensionTally>> dimension_tallies(
    const std::vector<PairwiseRecord>& records) {
  std::map<std::string, std::map<std::string, DimensionTally>> out;
  for (const auto& r : records) {
    for (auto dim : kSubDimensions) {
      const int v = r.sub_scores.get(dim);
      auto& l = out[r.left_system][std::string(dim)];
      auto& rt = out[r.right_system][std::string(dim)];
      if (v < 3) {
        ++l.favored;
        ++rt.disfavored;
      } else if (v > 3) {
        ++rt.favored;
        ++l.disfavored;
      } else {
        ++l.even;
        ++rt.even;
      }
    }
  }
  return out;
}

}  // namespace dr::eval
