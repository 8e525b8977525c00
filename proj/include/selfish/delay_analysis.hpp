#pragma once

#include <cstdint>
#include <optional>

namespace selfish {

struct DelayParams {
  double alpha = 0.0;
  double lambda = 1.0;
  /// Propagation delay from attacker to honest miners.
  double d_ah = 0.0;
  /// Propagation delay from honest miners to attacker.
  double d_ha = 0.0;

  /// Throws std::invalid_argument unless 0 <= alpha < 1, lambda > 0 and both delays >= 0.
  void validate() const;
};

/// Probability that the attacker mines two blocks before the honest network's
/// competing block reaches it and its own reply arrives.
double catchup_probability(const DelayParams& p);

struct DeviationGain {
  /// (k+1)q - rho
  double lower_bound = 0.0;
  /// q(1-rho)(k+1) - (1-q)rho(k+1) + rho k
  double full = 0.0;
};

DeviationGain deviation_gain(std::uint64_t k, double q, double rho);

/// Smallest k <= k_cap whose lower-bound gain is strictly positive.
std::optional<std::uint64_t> min_profitable_k(const DelayParams& p, double rho,
                                              std::uint64_t k_cap = 1'000'000);

} // namespace selfish
