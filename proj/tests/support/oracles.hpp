#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "dr/random.hpp"
#include "dr/reward/reward.hpp"

namespace drtest {

/// Advantages by the explicit double sum over TD residuals.
inline std::vector<double> brute_force_gae(const dr::reward::AdvantageTrace& t) {
  const std::size_t n = t.rewards.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    double a = 0.0;
    for (std::size_t l = 0; s + l < n; ++l) {
      const double delta = t.rewards[s + l] + t.gamma * t.values[s + l + 1] - t.values[s + l];
      a += std::pow(t.gamma * t.lambda, static_cast<double>(l)) * delta;
    }
    out[s] = a;
  }
  return out;
}

/// Clipped surrogate evaluated step by step from the definition.
inline double direct_ppo(const dr::reward::PpoBatch& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < b.advantages.size(); ++i) {
    const double r = std::exp(b.logp_new[i] - b.logp_old[i]);
    const double clipped = std::min(std::max(r, 1.0 - b.epsilon), 1.0 + b.epsilon);
    sum += std::min(r * b.advantages[i], clipped * b.advantages[i]);
  }
  return sum / static_cast<double>(b.advantages.size());
}

inline double uniform(dr::Rng& rng, double lo, double hi) { return lo + (hi - lo) * dr::uniform01(rng); }

inline dr::reward::AdvantageTrace random_trace(dr::Rng& rng, std::size_t max_len = 64) {
  dr::reward::AdvantageTrace t;
  const auto n = 1 + dr::uniform_index(rng, max_len);
  for (std::size_t i = 0; i < n; ++i) t.rewards.push_back(uniform(rng, -2, 2));
  for (std::size_t i = 0; i <= n; ++i) t.values.push_back(uniform(rng, -5, 5));
  t.gamma = dr::uniform01(rng);
  t.lambda = dr::uniform01(rng);
  return t;
}

inline dr::reward::PpoBatch random_batch(dr::Rng& rng, std::size_t max_len = 128) {
  dr::reward::PpoBatch b;
  const auto n = 1 + dr::uniform_index(rng, max_len);
  for (std::size_t i = 0; i < n; ++i) {
    b.logp_old.push_back(uniform(rng, -6, 0));
    b.logp_new.push_back(b.logp_old.back() + uniform(rng, -0.7, 0.7));
    b.advantages.push_back(uniform(rng, -3, 3));
  }
  b.epsilon = uniform(rng, 0.05, 0.4);
  return b;
}

}  // namespace drtest
