#pragma once

#include "selfish/core_model.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace selfish {

struct TransitionEntry {
  double probability = 0.0;
  StateIndex next = 0;
  RewardPair reward;
};

/// One (state, action) pair and the slice of its transitions.
struct ActionRow {
  Action action = Action::Adopt;
  std::uint32_t begin = 0;
  std::uint32_t end = 0;
};

/// Finite decision process over a truncated chain-state grid with two-component
/// rewards. Rows are stored per state in ascending action ordinal.
class MiningModel {
public:
  /// `row_offsets` has size()+1 entries delimiting each state's rows.
  MiningModel(MiningParams params, StateSpace space, std::vector<std::uint32_t> row_offsets,
              std::vector<ActionRow> rows, std::vector<TransitionEntry> transitions);

  const MiningParams& params() const noexcept { return params_; }
  const StateSpace& space() const noexcept { return space_; }
  int truncation() const noexcept { return space_.truncation(); }
  std::size_t num_states() const noexcept { return space_.size(); }

  std::span<const ActionRow> rows_of(StateIndex s) const {
    return {rows_.data() + row_offsets_[s], rows_.data() + row_offsets_[s + 1]};
  }
  std::uint32_t first_row(StateIndex s) const { return row_offsets_[s]; }
  std::span<const TransitionEntry> transitions_of(const ActionRow& row) const {
    return {transitions_.data() + row.begin, transitions_.data() + row.end};
  }
  const std::vector<ActionRow>& rows() const noexcept { return rows_; }
  const std::vector<TransitionEntry>& transitions() const noexcept { return transitions_; }

  /// Row index of `action` at `s`, or -1 when the action is not available there.
  std::int64_t find_row(StateIndex s, Action action) const;

  /// Start distribution: (1,0,irrelevant) w.p. alpha, (0,1,irrelevant) otherwise.
  std::vector<std::pair<StateIndex, double>> initial_distribution() const;

  /// States reachable from the start distribution under some sequence of actions,
  /// in ascending index order.
  const std::vector<StateIndex>& reachable_states() const noexcept { return reachable_; }

  /// Test hook: overwrite one transition probability (fault injection).
  void corrupt_probability_for_testing(std::size_t transition, double probability) {
    transitions_.at(transition).probability = probability;
  }

private:
  MiningParams params_;
  StateSpace space_;
  std::vector<std::uint32_t> row_offsets_;
  std::vector<ActionRow> rows_;
  std::vector<TransitionEntry> transitions_;
  std::vector<StateIndex> reachable_;
};

/// A model viewed through w_rho(x, y) = (1 - rho) x - rho y, with optional
/// scalar rewards that replace the transformed pair on selected rows.
class ScalarModel {
public:
  ScalarModel(std::shared_ptr<const MiningModel> model, double rho,
              std::vector<std::pair<std::uint32_t, double>> row_overrides = {});

  const MiningModel& model() const noexcept { return *model_; }
  const std::shared_ptr<const MiningModel>& shared_model() const noexcept { return model_; }
  double rho() const noexcept { return rho_; }

  double transform(const RewardPair& r) const noexcept {
    return (1.0 - rho_) * r.attacker - rho_ * r.honest;
  }
  /// Expected one-step scalar reward of every row.
  std::vector<double> expected_row_rewards() const;
  const std::vector<std::pair<std::uint32_t, double>>& row_overrides() const noexcept {
    return overrides_;
  }

private:
  std::shared_ptr<const MiningModel> model_;
  double rho_;
  std::vector<std::pair<std::uint32_t, double>> overrides_;
};

struct SolveResult {
  Policy policy;
  double gain = 0.0;
  std::size_t iterations = 0;
  double span = 0.0;
  /// Relative values with the reference state pinned at 0; reusable as a warm start.
  std::vector<double> values;
};

struct SolverOptions {
  double tolerance = 1e-6;
  std::size_t max_iterations = 1'000'000;
  double damping = 0.01;
};

class ConvergenceError : public std::runtime_error {
public:
  ConvergenceError(std::size_t iterations, double span);
  std::size_t iterations() const noexcept { return iterations_; }
  double span() const noexcept { return span_; }

private:
  std::size_t iterations_;
  double span_;
};

/// Relative value iteration. Stops when the span of the one-step Bellman
/// differences is at most the tolerance; gain is the midpoint of their range.
SolveResult solve_average_reward(const ScalarModel& model, const SolverOptions& options,
                                 std::span<const double> warm_start = {});
SolveResult solve_average_reward(const ScalarModel& model, double tolerance,
                                 std::size_t max_iterations = 1'000'000);

struct PolicyEvaluation {
  double attacker_rate = 0.0;
  double honest_rate = 0.0;
  double rev = 0.0;
  std::size_t recurrent_states = 0;
};

class InfeasiblePolicyError : public std::invalid_argument {
public:
  explicit InfeasiblePolicyError(const ChainState& s, Action action);
  const ChainState& state() const noexcept { return state_; }

private:
  ChainState state_;
};

/// States visited from the start distribution when following `policy`
/// (boundary states always take their terminal row). Throws
/// InfeasiblePolicyError when the policy picks an unavailable action.
std::vector<StateIndex> policy_reachable_states(const MiningModel& model, const Policy& policy);

/// Stationary distribution of the chain induced by `policy`, over the states
/// returned by policy_reachable_states (same order).
std::vector<double> stationary_distribution(const MiningModel& model, const Policy& policy,
                                            const std::vector<StateIndex>& states);

/// Long-run block rates and relative revenue of a policy.
PolicyEvaluation evaluate_policy_exact(const MiningModel& model, const Policy& policy);

/// Long-run average scalar reward of a fixed policy on a scalar model.
double evaluate_policy_gain(const ScalarModel& model, const Policy& policy);

struct ValidationCheck {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  std::size_t reachable_states = 0;

  bool all_passed() const {
    for (const auto& c : checks) {
      if (!c.passed) return false;
    }
    return true;
  }
  const ValidationCheck* find(const std::string& name) const {
    for (const auto& c : checks) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
};

ValidationReport validate_model(const MiningModel& model);

} // namespace selfish
