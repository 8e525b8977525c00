#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace selfish {

enum class ProtocolVariant : std::uint8_t { Standard = 0, UniformTieBreak = 1 };

/// Fork label of a state. The ordinal values are part of the on-disk
/// policy encoding and must not change.
enum class Fork : std::uint8_t { Irrelevant = 0, Relevant = 1, Active = 2 };

/// Attacker actions. The ordinal doubles as the greedy tie-break order.
enum class Action : std::uint8_t { Adopt = 0, Override = 1, Match = 2, Wait = 3 };

inline constexpr std::array<Fork, 3> kAllForks{Fork::Irrelevant, Fork::Relevant, Fork::Active};
inline constexpr std::array<Action, 4> kAllActions{Action::Adopt, Action::Override, Action::Match,
                                                    Action::Wait};

/// Attacker hashrate, race connectivity and tie-breaking rule.
class MiningParams {
public:
  /// Throws std::invalid_argument unless 0 < alpha < 0.5 and 0 <= gamma <= 1.
  MiningParams(double alpha, double gamma, ProtocolVariant variant = ProtocolVariant::Standard);

  double alpha() const noexcept { return alpha_; }
  double gamma() const noexcept { return gamma_; }
  ProtocolVariant variant() const noexcept { return variant_; }

  /// Probability that an honest block lands on the attacker's branch during a race.
  double race_win_probability() const noexcept {
    return variant_ == ProtocolVariant::UniformTieBreak ? 0.5 : gamma_;
  }

  bool operator==(const MiningParams&) const = default;

private:
  double alpha_;
  double gamma_;
  ProtocolVariant variant_;
};

struct ChainState {
  std::int32_t a = 0;
  std::int32_t h = 0;
  Fork fork = Fork::Irrelevant;

  bool operator==(const ChainState&) const = default;
};

/// Accepted blocks credited to (attacker, honest network) by one transition.
struct RewardPair {
  std::int32_t attacker = 0;
  std::int32_t honest = 0;

  bool operator==(const RewardPair&) const = default;
};

using StateIndex = std::uint32_t;

/// Dense indexing of the truncated grid {0..T} x {0..T} x {3 fork labels}.
class StateSpace {
public:
  /// Throws std::invalid_argument unless 1 <= T <= 10000.
  explicit StateSpace(int truncation);

  int truncation() const noexcept { return truncation_; }
  std::size_t size() const noexcept { return size_; }

  StateIndex index_of(const ChainState& s) const;
  ChainState state_of(StateIndex index) const;
  bool contains(const ChainState& s) const noexcept;
  bool is_boundary(const ChainState& s) const noexcept {
    return s.a == truncation_ || s.h == truncation_;
  }

  bool operator==(const StateSpace&) const = default;

private:
  int truncation_;
  std::size_t size_;
};

/// All 3*(T+1)^2 states in index order.
std::vector<ChainState> enumerate_states(int truncation);

/// Feasible actions at an interior state, in ordinal order.
std::vector<Action> feasible_actions(const ChainState& s, const MiningParams& params);
bool is_feasible(Action action, const ChainState& s, const MiningParams& params);

Action honest_policy(const ChainState& s);
Action sm1_policy(const ChainState& s);

/// alpha / (1 - alpha), the revenue ceiling of any policy.
double upper_bound_revenue(double alpha);

/// Provenance attached to a policy so that it can be re-checked on load.
struct PolicyProvenance {
  double alpha = 0.0;
  double gamma = 0.0;
  ProtocolVariant variant = ProtocolVariant::Standard;

  bool operator==(const PolicyProvenance&) const = default;
};

/// Total map from the states of a truncated grid to actions.
/// Boundary states always carry Adopt, the only terminal action.
class Policy {
public:
  Policy(StateSpace space, std::vector<Action> actions, PolicyProvenance provenance = {});

  /// Builds a total policy by evaluating `rule` at every interior state.
  static Policy from_rule(int truncation, const std::function<Action(const ChainState&)>& rule,
                          PolicyProvenance provenance = {});

  const StateSpace& space() const noexcept { return space_; }
  int truncation() const noexcept { return space_.truncation(); }
  const PolicyProvenance& provenance() const noexcept { return provenance_; }
  void set_provenance(const PolicyProvenance& p) { provenance_ = p; }

  Action operator()(const ChainState& s) const { return actions_[space_.index_of(s)]; }
  Action at(StateIndex index) const { return actions_.at(index); }
  const std::vector<Action>& actions() const noexcept { return actions_; }

  bool operator==(const Policy&) const = default;

private:
  StateSpace space_;
  std::vector<Action> actions_;
  PolicyProvenance provenance_;
};

char action_letter(Action action);
std::string_view to_string(Action action);
std::string_view to_string(Fork fork);
std::string_view to_string(ProtocolVariant variant);
Action parse_action(std::string_view text);
Fork parse_fork(std::string_view text);
/// Accepts "standard" and "uniform" (or "uniform-tie-break").
ProtocolVariant parse_variant(std::string_view text);

} // namespace selfish
