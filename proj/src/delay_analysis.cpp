#include "selfish/delay_analysis.hpp"

#include <cmath>
#include <stdexcept>

namespace selfish {

void DelayParams::validate() const {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in [0, 1)");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be positive");
  if (!(d_ah >= 0.0) || !(d_ha >= 0.0)) throw std::invalid_argument("delays must be non-negative");
}

double catchup_probability(const DelayParams& p) {
  p.validate();
  return p.alpha * p.alpha * std::exp(-(1.0 - p.alpha) * p.lambda * (p.d_ah + p.d_ha));
}

DeviationGain deviation_gain(std::uint64_t k, double q, double rho) {
  const double k1 = static_cast<double>(k) + 1.0;
  return {k1 * q - rho, q * (1.0 - rho) * k1 - (1.0 - q) * rho * k1 + rho * static_cast<double>(k)};
}

std::optional<std::uint64_t> min_profitable_k(const DelayParams& p, double rho, std::uint64_t k_cap) {
  if (k_cap < 1) throw std::invalid_argument("k cap must be at least 1");
  const double q = catchup_probability(p);
  if (q <= 0.0) return std::nullopt;
  // Start just below the analytic root and step up to absorb rounding.
  const double root = rho / q - 1.0;
  std::uint64_t k = 1;
  if (root > 2.0) {
    if (root - 1.0 >= static_cast<double>(k_cap)) return std::nullopt;
    k = static_cast<std::uint64_t>(std::floor(root)) - 1;
  }
  for (; k <= k_cap; ++k) {
    if (deviation_gain(k, q, rho).lower_bound > 0.0) return k;
  }
  return std::nullopt;
}

} // namespace selfish
