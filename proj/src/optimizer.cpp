#include "selfish/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>
#include <thread>

namespace selfish {

void OptimizeConfig::validate() const {
  if (!(eps > 0.0 && eps < 8.0 * params.alpha())) {
    throw std::invalid_argument("eps must satisfy 0 < eps < 8*alpha");
  }
  if (!(eps_prime > 0.0 && eps_prime < 1.0)) {
    throw std::invalid_argument("eps-prime must be in (0, 1)");
  }
  if (truncation < 2) throw std::invalid_argument("truncation T must be at least 2");
}

BoundsReport find_optimal(const OptimizeConfig& config) {
  config.validate();
  const auto model = build_base_model(config.params, config.truncation);

  SolverOptions options;
  options.tolerance = config.eps / 8.0;
  options.max_iterations = config.max_iterations;

  BoundsReport report{.policy = Policy::from_rule(config.truncation, honest_policy)};
  double low = 0.0;
  double high = 1.0;
  double rho = 0.0;
  std::vector<double> warm;
  std::optional<SolveResult> last;
  do {
    rho = 0.5 * (low + high);
    SolveResult result =
        solve_average_reward(build_truncated(model, BoundaryMode::UnderPaying, rho), options, warm);
    report.probes.push_back({rho, result.gain, result.iterations});
    if (result.gain > 0.0) {
      low = rho;
    } else {
      high = rho;
    }
    warm = result.values;
    last = std::move(result);
  } while (high - low >= config.eps / 8.0);

  report.rho_final = rho;
  report.low = low;
  report.high = high;
  report.final_gain = last->gain;
  report.lower_bound = rho - config.eps;
  report.policy = last->policy;

  report.rho_prime = std::max(low - config.eps / 4.0, 0.0);
  SolverOptions over_options = options;
  over_options.tolerance = config.eps_prime;
  const SolveResult over = solve_average_reward(
      build_truncated(model, BoundaryMode::OverPaying, report.rho_prime, config.scope), over_options);
  report.overpaying_gain = over.gain;
  report.raw_upper_bound = report.rho_prime + 2.0 * (over.gain + config.eps_prime);
  report.ceiling = upper_bound_revenue(config.params.alpha());
  report.upper_bound = std::min(report.raw_upper_bound, report.ceiling);
  return report;
}

void ThresholdConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in [0, 1]");
  if (!(alpha_tol >= 1e-5)) throw std::invalid_argument("alpha tolerance must be at least 1e-5");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (truncation < 2) throw std::invalid_argument("truncation T must be at least 2");
}

bool certify_honest_optimal(const MiningParams& params, int truncation, double eps,
                            std::size_t max_iterations, double* gain_override, double* gain_adopt) {
  SolverOptions options;
  options.tolerance = eps;
  options.max_iterations = max_iterations;
  const double rho = params.alpha();
  auto solve_variant = [&](ThresholdVariant variant) {
    const auto model = build_honest_disabled(params, truncation, variant);
    return solve_average_reward(build_truncated(model, BoundaryMode::OverPaying, rho), options).gain;
  };
  const double g_override = solve_variant(ThresholdVariant::OverrideDisabledAt10);
  const double g_adopt = solve_variant(ThresholdVariant::AdoptDisabledAt01);
  if (gain_override) *gain_override = g_override;
  if (gain_adopt) *gain_adopt = g_adopt;
  return g_override <= -eps && g_adopt <= -eps;
}

ThresholdReport profit_threshold(const ThresholdConfig& config) {
  config.validate();
  ThresholdReport report;
  report.gamma = config.gamma;
  report.variant = config.variant;

  double lo = 0.0;
  double hi = 0.5;
  while (hi - lo > config.alpha_tol) {
    const double alpha = 0.5 * (lo + hi);
    const MiningParams params(alpha, config.gamma, config.variant);
    ThresholdProbe probe;
    probe.alpha = alpha;
    const bool certified =
        certify_honest_optimal(params, config.truncation, config.eps, config.max_iterations,
                               &probe.gain_override_disabled, &probe.gain_adopt_disabled);
    if (certified) {
      probe.verdict = ThresholdVerdict::HonestOptimal;
      lo = alpha;
      report.alpha_lower = alpha;
    } else {
      OptimizeConfig opt{.params = params, .truncation = config.truncation, .eps = config.eps,
                         .eps_prime = config.eps, .max_iterations = config.max_iterations};
      const BoundsReport bounds = find_optimal(opt);
      probe.optimal_lower_bound = bounds.lower_bound;
      if (bounds.lower_bound > alpha + config.eps) {
        probe.verdict = ThresholdVerdict::Profitable;
        report.alpha_upper = report.alpha_upper ? std::min(*report.alpha_upper, alpha) : alpha;
      } else {
        probe.verdict = ThresholdVerdict::Undecided;
        ++report.undecided_probes;
      }
      hi = alpha;
    }
    report.probes.push_back(probe);
  }
  report.bracket_upper = hi;
  report.width = hi - lo;
  return report;
}

std::vector<SweepRow> sweep(const SweepConfig& config) {
  for (double a : config.alphas) {
    if (!(a < 0.5)) throw std::invalid_argument("sweep alphas must be < 0.5");
  }
  std::vector<SweepRow> rows;
  for (double a : config.alphas) {
    for (double g : config.gammas) {
      SweepRow row;
      row.alpha = a;
      row.gamma = g;
      row.variant = config.variant;
      row.truncation = config.truncation;
      row.eps = config.eps;
      rows.push_back(row);
    }
  }

  auto run_point = [&config](SweepRow& row) {
    try {
      const MiningParams params(row.alpha, row.gamma, config.variant);
      row.honest_rev = row.alpha;
      row.ceiling = upper_bound_revenue(row.alpha);
      const auto model = build_base_model(params, config.truncation);
      row.sm1_rev = evaluate_policy_exact(*model, Policy::from_rule(config.truncation, sm1_policy)).rev;
      const BoundsReport bounds = find_optimal({.params = params, .truncation = config.truncation,
                                                .eps = config.eps, .eps_prime = config.eps_prime});
      row.lower_bound = bounds.lower_bound;
      row.upper_bound = bounds.upper_bound;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  };

  const unsigned jobs = std::max(1u, std::min<unsigned>(config.jobs, static_cast<unsigned>(rows.size())));
  if (jobs <= 1) {
    for (auto& row : rows) run_point(row);
    return rows;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  for (unsigned w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < rows.size(); i = next++) run_point(rows[i]);
    });
  }
  for (auto& t : workers) t.join();
  return rows;
}

std::string_view to_string(ThresholdVerdict verdict) {
  switch (verdict) {
  case ThresholdVerdict::HonestOptimal: return "honest-optimal";
  case ThresholdVerdict::Profitable: return "profitable";
  case ThresholdVerdict::Undecided: return "undecided";
  }
  return "?";
}

} // namespace selfish
