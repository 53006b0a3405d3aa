#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace drctl {

struct ModelSettings {
  std::string backend = "none";  // none | script | http
  std::string script;            // JSON Lines replies for "script"
  std::string base_url;
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string api_key_env = "MODEL_API_KEY";
  std::int64_t timeout_s = 300;
};

struct Config {
  std::uint64_t seed = 0;
  std::int64_t jobs = 1;

  ModelSettings model;
  ModelSettings judge;

  std::int64_t max_turns = 30;
  std::int64_t max_tokens_per_turn = 16384;
  std::int64_t tool_call_budget = 200;
  std::int64_t total_token_budget = 30 * 16384;
  std::int64_t search_budget = 100;
  std::int64_t offload_threshold = 8192;
  std::string now;  // RFC 3339; empty means the host clock
  std::string workspace;

  std::string corpus;
  std::string index;
  std::string authority;
  double authority_boost = 1.5;
  std::int64_t cache_capacity = 4096;
  std::int64_t search_k = 5;

  std::int64_t samples = 10;
  std::int64_t walk_max_steps = 4;
  std::int64_t min_seed_degree = 3;
  std::int64_t max_seed_degree = 10;
  std::int64_t min_nodes = 10;
  std::int64_t max_nodes = 40;
  std::int64_t supernode_threshold = 1000;
  std::int64_t seeds_per_sample = 3;
  double consistency_threshold = 0.8;

  std::int64_t judge_trials = 3;
  std::int64_t judge_retries = 1;

  std::string host = "127.0.0.1";
  std::int64_t port = 8080;
  std::string data_dir = "review-data";
  std::string static_dir;
  std::string tokens;
  std::int64_t lease_minutes = 30;
};

/// Every key as "section.key" with its value rendered as TOML, in file order.
std::vector<std::pair<std::string, std::string>> rendered(Config config);

/// Applies a TOML file (unknown sections or keys throw dr::Error) and then
/// environment overrides named DR_<SECTION>_<KEY>.
void load_config(Config& config, const std::filesystem::path& file);
void apply_env_overrides(Config& config);

}  // namespace drctl
