#pragma once

#include "selfish/core_model.hpp"
#include "selfish/mdp_engine.hpp"

#include <memory>
#include <string>

namespace selfish {

enum class BoundaryMode : std::uint8_t { UnderPaying, OverPaying };

/// Which honest-mining action is removed for threshold certification.
enum class ThresholdVariant : std::uint8_t { OverrideDisabledAt10, AdoptDisabledAt01 };

/// Scope of the (1 - rho) factor in the compensation paid at a = T.
enum class CompensationScope : std::uint8_t {
  AsPrinted,  ///< (1 - rho) multiplies only the alpha(1-alpha)/(1-2alpha)^2 term
  WholeLength ///< (1 - rho) multiplies the whole expected final chain length
};

/// Base decision process over the truncated grid. Interior states get one row
/// per feasible action; states with max(a,h) = T get a single terminal row
/// carrying Adopt's transitions and reward.
std::shared_ptr<const MiningModel> build_base_model(const MiningParams& params, int truncation);

/// Base model with one honest-mining action removed at (1,0) or (0,1).
std::shared_ptr<const MiningModel> build_honest_disabled(const MiningParams& params, int truncation,
                                                         ThresholdVariant variant);

/// Scalar reward paid to the attacker at a truncation state of the over-paying process.
/// Uses the a-side formula when a > h and the h-side one otherwise.
double overpaying_terminal_reward(int a, int h, double rho, double alpha,
                                  CompensationScope scope = CompensationScope::AsPrinted);

/// Attaches w_rho rewards; in OverPaying mode the terminal rows are replaced by
/// the compensation reward.
ScalarModel build_truncated(std::shared_ptr<const MiningModel> model, BoundaryMode mode, double rho,
                            CompensationScope scope = CompensationScope::AsPrinted);

/// Text dump, one row per (state, action): "a,h,fork | action -> [p:next:rA,rH]...".
std::string dump_model(const MiningModel& model);

std::string_view to_string(ThresholdVariant variant);

} // namespace selfish
