#include "selfish/transitions.hpp"

namespace selfish {

OutcomeSet action_outcomes(const ChainState& s, Action action, const MiningParams& params) {
  const double alpha = params.alpha();
  const double honest = 1.0 - alpha;
  switch (action) {
  case Action::Adopt: {
    const RewardPair r{0, s.h};
    return {{BlockEvent::AttackerBlock, alpha, {1, 0, Fork::Irrelevant}, r},
            {BlockEvent::HonestBlock, honest, {0, 1, Fork::Irrelevant}, r}};
  }
  case Action::Override: {
    const RewardPair r{s.h + 1, 0};
    return {{BlockEvent::AttackerBlock, alpha, {s.a - s.h, 0, Fork::Irrelevant}, r},
            {BlockEvent::HonestBlock, honest, {s.a - s.h - 1, 1, Fork::Relevant}, r}};
  }
  case Action::Match:
  case Action::Wait:
    if (is_race(action, s)) {
      const double win = params.race_win_probability();
      return {{BlockEvent::AttackerBlock, alpha, {s.a + 1, s.h, Fork::Active}, {}},
              {BlockEvent::HonestOnAttackerSide, win * honest, {s.a - s.h, 1, Fork::Relevant},
               {s.h, 0}},
              {BlockEvent::HonestBlock, (1.0 - win) * honest, {s.a, s.h + 1, Fork::Relevant}, {}}};
    }
    return {{BlockEvent::AttackerBlock, alpha, {s.a + 1, s.h, Fork::Irrelevant}, {}},
            {BlockEvent::HonestBlock, honest, {s.a, s.h + 1, Fork::Relevant}, {}}};
  }
  return {};
}

} // namespace selfish
