#include "config.hpp"

#include <cctype>
#include <cstdlib>
#include <functional>
#include <set>
#include <variant>

#include <fmt/format.h>
#include <toml.hpp>

#include "dr/error.hpp"

namespace drctl {

namespace {

using Slot = std::variant<std::string*, std::int64_t*, std::uint64_t*, double*>;

struct Key {
  std::string section;
  std::string name;
  Slot slot;
};

std::vector<Key> keys(Config& c) {
  std::vector<Key> k = {
      {"run", "seed", &c.seed},
      {"run", "jobs", &c.jobs},
  };
  for (auto [section, m] : {std::pair{"model", &c.model}, std::pair{"judge", &c.judge}}) {
    k.push_back({section, "backend", &m->backend});
    k.push_back({section, "script", &m->script});
    k.push_back({section, "base_url", &m->base_url});
    k.push_back({section, "path", &m->path});
    k.push_back({section, "model", &m->model});
    k.push_back({section, "api_key_env", &m->api_key_env});
    k.push_back({section, "timeout_s", &m->timeout_s});
  }
  k.insert(k.end(), {
      {"judge", "trials", &c.judge_trials},
      {"judge", "retries", &c.judge_retries},
      {"agent", "max_turns", &c.max_turns},
      {"agent", "max_tokens_per_turn", &c.max_tokens_per_turn},
      {"agent", "tool_call_budget", &c.tool_call_budget},
      {"agent", "total_token_budget", &c.total_token_budget},
      {"agent", "search_budget", &c.search_budget},
      {"agent", "offload_threshold", &c.offload_threshold},
      {"agent", "now", &c.now},
      {"agent", "workspace", &c.workspace},
      {"retrieval", "corpus", &c.corpus},
      {"retrieval", "index", &c.index},
      {"retrieval", "authority", &c.authority},
      {"retrieval", "authority_boost", &c.authority_boost},
      {"retrieval", "cache_capacity", &c.cache_capacity},
      {"retrieval", "k", &c.search_k},
      {"synth", "samples", &c.samples},
      {"synth", "walk_max_steps", &c.walk_max_steps},
      {"synth", "min_seed_degree", &c.min_seed_degree},
      {"synth", "max_seed_degree", &c.max_seed_degree},
      {"synth", "min_nodes", &c.min_nodes},
      {"synth", "max_nodes", &c.max_nodes},
      {"synth", "supernode_threshold", &c.supernode_threshold},
      {"synth", "seeds_per_sample", &c.seeds_per_sample},
      {"synth", "consistency_threshold", &c.consistency_threshold},
      {"service", "host", &c.host},
      {"service", "port", &c.port},
      {"service", "data_dir", &c.data_dir},
      {"service", "static_dir", &c.static_dir},
      {"service", "tokens", &c.tokens},
      {"service", "lease_minutes", &c.lease_minutes},
  });
  return k;
}

std::string render(const Slot& slot) {
  return std::visit(
      [](auto* p) -> std::string {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return fmt::format("\"{}\"", *p);
        } else {
          return fmt::format("{}", *p);
        }
      },
      slot);
}

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw dr::Error(dr::ErrorCode::kInvalidArgument, fmt::format("config {}: {}", where, what));
}

void assign_toml(const Key& key, const toml::node& node) {
  const auto where = key.section + "." + key.name;
  std::visit(
      [&](auto* p) {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, std::string>) {
          if (!node.is_string()) bad(where, "expected a string");
          *p = *node.value<std::string>();
        } else if constexpr (std::is_same_v<T, double>) {
          if (!node.is_number()) bad(where, "expected a number");
          *p = *node.value<double>();
        } else {
          if (!node.is_integer()) bad(where, "expected an integer");
          const auto v = *node.value<std::int64_t>();
          if constexpr (std::is_same_v<T, std::uint64_t>) {
            if (v < 0) bad(where, "must not be negative");
          }
          *p = static_cast<T>(v);
        }
      },
      key.slot);
}

void assign_text(const Key& key, const std::string& text, const std::string& origin) {
  std::visit(
      [&](auto* p) {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, std::string>) {
          *p = text;
        } else {
          std::size_t used = 0;
          try {
            if constexpr (std::is_same_v<T, double>) {
              *p = std::stod(text, &used);
            } else if constexpr (std::is_same_v<T, std::uint64_t>) {
              if (!text.empty() && text[0] == '-') throw std::invalid_argument("negative");
              *p = std::stoull(text, &used);
            } else {
              *p = std::stoll(text, &used);
            }
          } catch (const std::exception&) {
            used = 0;
          }
          if (used == 0 || used != text.size()) bad(origin, "cannot parse '" + text + "'");
        }
      },
      key.slot);
}

// Relative paths in a config file are resolved against the file's directory.
bool is_path_key(const Key& k) {
  static const std::set<std::string> names = {"script", "corpus", "index", "authority", "workspace",
                                              "data_dir", "static_dir", "tokens"};
  return names.count(k.name) > 0 && std::holds_alternative<std::string*>(k.slot);
}

}  // namespace

std::vector<std::pair<std::string, std::string>> rendered(Config c) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : keys(c)) out.emplace_back(k.section + "." + k.name, render(k.slot));
  return out;
}

void load_config(Config& config, const std::filesystem::path& file) {
  toml::table root;
  try {
    root = toml::parse_file(file.string());
  } catch (const toml::parse_error& e) {
    throw dr::Error(dr::ErrorCode::kParse,
                    fmt::format("{}:{}: {}", file.string(), e.source().begin.line, e.description()));
  }
  auto all = keys(config);
  for (auto&& [section, node] : root) {
    const std::string sname(section.str());
    if (!node.is_table()) bad(sname, "expected a table");
    bool known_section = false;
    for (const auto& k : all) known_section = known_section || k.section == sname;
    if (!known_section) bad(sname, "unknown section");
    for (auto&& [key, value] : *node.as_table()) {
      const std::string kname(key.str());
      const Key* match = nullptr;
      for (const auto& k : all) {
        if (k.section == sname && k.name == kname) match = &k;
      }
      if (!match) bad(sname + "." + kname, "unknown key");
      assign_toml(*match, value);
      if (is_path_key(*match)) {
        auto* text = std::get<std::string*>(match->slot);
        if (!text->empty() && std::filesystem::path(*text).is_relative()) {
          *text = (file.parent_path() / *text).lexically_normal().string();
        }
      }
    }
  }
}

void apply_env_overrides(Config& config) {
  for (const auto& k : keys(config)) {
    std::string var = "DR_" + k.section + "_" + k.name;
    for (auto& ch : var) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    if (const char* v = std::getenv(var.c_str())) assign_text(k, v, var);
  }
}

}  // namespace drctl
