#pragma once

#include "selfish/chain_mdp.hpp"
#include "selfish/core_model.hpp"
#include "selfish/mdp_engine.hpp"

#include <optional>
#include <string>
#include <vector>

namespace selfish {

struct OptimizeConfig {
  MiningParams params;
  int truncation = 75;
  double eps = 1e-5;
  double eps_prime = 1e-5;
  std::size_t max_iterations = 1'000'000;
  CompensationScope scope = CompensationScope::AsPrinted;

  /// Throws std::invalid_argument unless 0 < eps < 8*alpha and 0 < eps_prime < 1.
  void validate() const;
};

/// One step of the revenue-root bisection.
struct RhoProbe {
  double rho = 0.0;
  double gain = 0.0;
  std::size_t iterations = 0;
};

struct BoundsReport {
  double lower_bound = 0.0;
  Policy policy;
  /// min(raw_upper_bound, alpha/(1-alpha)); both are valid upper bounds.
  double upper_bound = 0.0;
  double raw_upper_bound = 0.0;
  double ceiling = 0.0;
  std::vector<RhoProbe> probes;
  double rho_final = 0.0;
  double rho_prime = 0.0;
  double low = 0.0;
  double high = 1.0;
  double final_gain = 0.0;
  double overpaying_gain = 0.0;
};

/// Bisection for the root of the under-paying gain curve, followed by one
/// over-paying solve for the upper bound.
BoundsReport find_optimal(const OptimizeConfig& config);

enum class ThresholdVerdict { HonestOptimal, Profitable, Undecided };

struct ThresholdProbe {
  double alpha = 0.0;
  double gain_override_disabled = 0.0;
  double gain_adopt_disabled = 0.0;
  ThresholdVerdict verdict = ThresholdVerdict::Undecided;
  std::optional<double> optimal_lower_bound;
};

struct ThresholdConfig {
  double gamma = 0.0;
  ProtocolVariant variant = ProtocolVariant::Standard;
  int truncation = 75;
  double eps = 1e-5;
  double alpha_tol = 1e-3;
  std::size_t max_iterations = 1'000'000;

  void validate() const;
};

struct ThresholdReport {
  double gamma = 0.0;
  ProtocolVariant variant = ProtocolVariant::Standard;
  /// Largest alpha at which honest mining was certified optimal (0 if none).
  double alpha_lower = 0.0;
  /// Smallest alpha at which a strictly profitable deviation was exhibited.
  std::optional<double> alpha_upper;
  /// Upper end of the final bisection bracket.
  double bracket_upper = 0.5;
  double width = 0.5;
  std::size_t undecided_probes = 0;
  std::vector<ThresholdProbe> probes;
};

/// True when both honest-disabled over-paying models at rho = alpha have
/// gain <= -eps; fills the two gains when requested.
bool certify_honest_optimal(const MiningParams& params, int truncation, double eps,
                            std::size_t max_iterations = 1'000'000, double* gain_override = nullptr,
                            double* gain_adopt = nullptr);

ThresholdReport profit_threshold(const ThresholdConfig& config);

struct SweepRow {
  double alpha = 0.0;
  double gamma = 0.0;
  ProtocolVariant variant = ProtocolVariant::Standard;
  int truncation = 0;
  double eps = 0.0;
  double honest_rev = 0.0;
  double sm1_rev = 0.0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  double ceiling = 0.0;
  std::string error;
};

struct SweepConfig {
  std::vector<double> alphas;
  std::vector<double> gammas;
  ProtocolVariant variant = ProtocolVariant::Standard;
  int truncation = 75;
  double eps = 1e-5;
  double eps_prime = 1e-5;
  unsigned jobs = 1;
};

/// One row per (alpha, gamma) in alpha-major order. Failures are recorded in
/// the row's error field and the sweep continues.
std::vector<SweepRow> sweep(const SweepConfig& config);

std::string_view to_string(ThresholdVerdict verdict);

} // namespace selfish
