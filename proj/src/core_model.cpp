#include "selfish/core_model.hpp"

#include <stdexcept>

namespace selfish {

MiningParams::MiningParams(double alpha, double gamma, ProtocolVariant variant)
    : alpha_(alpha), gamma_(gamma), variant_(variant) {
  if (!(alpha < 0.5)) {
    throw std::invalid_argument("alpha must be < 0.5, got " + std::to_string(alpha));
  }
  if (!(alpha > 0.0)) {
    throw std::invalid_argument("alpha must be > 0, got " + std::to_string(alpha));
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("gamma must be in [0, 1], got " + std::to_string(gamma));
  }
}

StateSpace::StateSpace(int truncation) : truncation_(truncation) {
  if (truncation < 1 || truncation > 10000) {
    throw std::invalid_argument("truncation T must be in [1, 10000], got " +
                                std::to_string(truncation));
  }
  const auto side = static_cast<std::size_t>(truncation) + 1;
  size_ = 3 * side * side;
}

bool StateSpace::contains(const ChainState& s) const noexcept {
  return s.a >= 0 && s.h >= 0 && s.a <= truncation_ && s.h <= truncation_ &&
         static_cast<int>(s.fork) <= 2;
}

StateIndex StateSpace::index_of(const ChainState& s) const {
  if (!contains(s)) {
    throw std::out_of_range("state (" + std::to_string(s.a) + "," + std::to_string(s.h) +
                            ") outside grid of T=" + std::to_string(truncation_));
  }
  const auto side = static_cast<StateIndex>(truncation_) + 1;
  return static_cast<StateIndex>(s.fork) +
         3 * (static_cast<StateIndex>(s.h) + side * static_cast<StateIndex>(s.a));
}

ChainState StateSpace::state_of(StateIndex index) const {
  if (index >= size_) throw std::out_of_range("state index out of range");
  const auto side = static_cast<StateIndex>(truncation_) + 1;
  const StateIndex cell = index / 3;
  return ChainState{static_cast<std::int32_t>(cell / side), static_cast<std::int32_t>(cell % side),
                    static_cast<Fork>(index % 3)};
}

std::vector<ChainState> enumerate_states(int truncation) {
  const StateSpace space(truncation);
  std::vector<ChainState> out;
  out.reserve(space.size());
  for (StateIndex i = 0; i < space.size(); ++i) out.push_back(space.state_of(i));
  return out;
}

bool is_feasible(Action action, const ChainState& s, const MiningParams& params) {
  switch (action) {
  case Action::Adopt:
  case Action::Wait:
    return true;
  case Action::Override:
    return s.a > s.h;
  case Action::Match: {
    // A race needs an honest block to contest.
    if (s.h < 1 || s.a < s.h) return false;
    if (s.fork == Fork::Relevant) return true;
    return params.variant() == ProtocolVariant::UniformTieBreak && s.fork == Fork::Irrelevant;
  }
  }
  return false;
}

std::vector<Action> feasible_actions(const ChainState& s, const MiningParams& params) {
  std::vector<Action> out;
  for (Action act : kAllActions) {
    if (is_feasible(act, s, params)) out.push_back(act);
  }
  return out;
}

Action honest_policy(const ChainState& s) {
  if (s.h > s.a) return Action::Adopt;
  if (s.a > s.h) return Action::Override;
  return Action::Wait;
}

Action sm1_policy(const ChainState& s) {
  if (s.h > s.a) return Action::Adopt;
  if (s.h == 1 && s.a == 1) return s.fork == Fork::Relevant ? Action::Match : Action::Wait;
  if (s.h >= 1 && s.h == s.a - 1) return Action::Override;
  return Action::Wait;
}

double upper_bound_revenue(double alpha) {
  if (!(alpha >= 0.0 && alpha < 0.5)) {
    throw std::invalid_argument("alpha must be in [0, 0.5)");
  }
  return alpha / (1.0 - alpha);
}

Policy::Policy(StateSpace space, std::vector<Action> actions, PolicyProvenance provenance)
    : space_(space), actions_(std::move(actions)), provenance_(provenance) {
  if (actions_.size() != space_.size()) {
    throw std::invalid_argument("policy must assign an action to every grid state");
  }
  for (StateIndex i = 0; i < space_.size(); ++i) {
    if (space_.is_boundary(space_.state_of(i))) actions_[i] = Action::Adopt;
  }
}

Policy Policy::from_rule(int truncation, const std::function<Action(const ChainState&)>& rule,
                         PolicyProvenance provenance) {
  const StateSpace space(truncation);
  std::vector<Action> actions(space.size(), Action::Adopt);
  for (StateIndex i = 0; i < space.size(); ++i) {
    const ChainState s = space.state_of(i);
    if (!space.is_boundary(s)) actions[i] = rule(s);
  }
  return Policy(space, std::move(actions), provenance);
}

char action_letter(Action action) {
  switch (action) {
  case Action::Adopt: return 'a';
  case Action::Override: return 'o';
  case Action::Match: return 'm';
  case Action::Wait: return 'w';
  }
  return '?';
}

std::string_view to_string(Action action) {
  switch (action) {
  case Action::Adopt: return "adopt";
  case Action::Override: return "override";
  case Action::Match: return "match";
  case Action::Wait: return "wait";
  }
  return "?";
}

std::string_view to_string(Fork fork) {
  switch (fork) {
  case Fork::Irrelevant: return "irrelevant";
  case Fork::Relevant: return "relevant";
  case Fork::Active: return "active";
  }
  return "?";
}

std::string_view to_string(ProtocolVariant variant) {
  return variant == ProtocolVariant::UniformTieBreak ? "uniform" : "standard";
}

Action parse_action(std::string_view text) {
  for (Action act : kAllActions) {
    if (to_string(act) == text) return act;
  }
  throw std::invalid_argument("unknown action '" + std::string(text) + "'");
}

Fork parse_fork(std::string_view text) {
  for (Fork f : kAllForks) {
    if (to_string(f) == text) return f;
  }
  throw std::invalid_argument("unknown fork label '" + std::string(text) + "'");
}

ProtocolVariant parse_variant(std::string_view text) {
  if (text == "standard") return ProtocolVariant::Standard;
  if (text == "uniform" || text == "uniform-tie-break") return ProtocolVariant::UniformTieBreak;
  throw std::invalid_argument("unknown protocol variant '" + std::string(text) + "'");
}

} // namespace selfish
