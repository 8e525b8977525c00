#pragma once

#include "selfish/core_model.hpp"

#include <array>
#include <cstddef>
#include <initializer_list>

namespace selfish {

/// What happened in the round that produced an outcome.
enum class BlockEvent : std::uint8_t {
  AttackerBlock,        ///< the attacker mined the next block
  HonestBlock,          ///< honest miners extended their own branch
  HonestOnAttackerSide, ///< during a race, an honest miner built on the attacker's branch
};

struct Outcome {
  BlockEvent event;
  double probability;
  ChainState next;
  RewardPair reward;
};

/// True when the action leaves the honest network split between two branches.
/// An active fork whose attacker branch is shorter (unreachable) is no race.
inline bool is_race(Action action, const ChainState& s) {
  return action == Action::Match || (action == Action::Wait && s.fork == Fork::Active && s.a >= s.h);
}

/// At most three outcomes; stored inline so the simulator's hot loop does not allocate.
class OutcomeSet {
public:
  OutcomeSet(std::initializer_list<Outcome> items) {
    for (const Outcome& o : items) items_[count_++] = o;
  }
  const Outcome* begin() const noexcept { return items_.data(); }
  const Outcome* end() const noexcept { return items_.data() + count_; }
  std::size_t size() const noexcept { return count_; }
  const Outcome& operator[](std::size_t i) const noexcept { return items_[i]; }
  /// The outcome produced by `event`; the event must be present.
  const Outcome& for_event(BlockEvent event) const noexcept {
    for (std::size_t i = 0; i + 1 < count_; ++i) {
      if (items_[i].event == event) return items_[i];
    }
    return items_[count_ - 1];
  }

private:
  std::array<Outcome, 3> items_{};
  std::size_t count_ = 0;
};

/// The outcomes of taking `action` at `s` in the untruncated process, one per
/// block event, including zero-probability ones. Feasibility is the caller's job.
OutcomeSet action_outcomes(const ChainState& s, Action action, const MiningParams& params);

} // namespace selfish
