#pragma once

#include "selfish/core_model.hpp"

#include <cstdint>
#include <vector>

namespace selfish {

struct SimConfig {
  MiningParams params;
  Policy policy;
  std::uint64_t rounds = 1'000'000;
  std::uint64_t seed = 0;
  /// Exploratory mode: past the policy's grid, keep playing SM1 instead of
  /// forcing Adopt at max(a,h) = T.
  bool sm1_tail = false;
};

struct SimResult {
  std::uint64_t attacker_blocks = 0;
  std::uint64_t honest_blocks = 0;
  double rev = 0.0;
  std::uint64_t rounds = 0;
  std::uint64_t seed = 0;
  /// Regenerative (cycle-based) standard error of rev.
  double std_error = 0.0;
  std::uint64_t cycles = 0;
};

/// Plays the policy for `rounds` block-creation events. Each round draws one
/// uniform for block ownership and, when honest miners are split by a race, a
/// second uniform for which branch they extend. Throws InfeasiblePolicyError
/// when the policy picks an unavailable action at a visited state.
SimResult simulate_policy(const SimConfig& config);

struct BatchResult {
  double mean_rev = 0.0;
  double sample_std = 0.0;
  std::vector<SimResult> replicas;
};

/// Replica k runs with seed + k * seed_stride. Requires replicas >= 2.
BatchResult simulate_batch(const SimConfig& config, std::size_t replicas, std::uint64_t seed_stride,
                           unsigned jobs = 1);

} // namespace selfish
