#include "selfish/chain_mdp.hpp"

#include "selfish/transitions.hpp"

#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace selfish {

namespace {

using RowFilter = std::function<bool(const ChainState&, Action)>;

std::shared_ptr<const MiningModel> build_model(const MiningParams& params, int truncation,
                                               const RowFilter& keep) {
  const StateSpace space(truncation);
  std::vector<std::uint32_t> offsets;
  std::vector<ActionRow> rows;
  std::vector<TransitionEntry> transitions;
  offsets.reserve(space.size() + 1);
  offsets.push_back(0);

  auto emit = [&](const ChainState& s, Action act) {
    ActionRow row{act, static_cast<std::uint32_t>(transitions.size()), 0};
    for (const Outcome& o : action_outcomes(s, act, params)) {
      if (o.probability > 0.0) {
        transitions.push_back({o.probability, space.index_of(o.next), o.reward});
      }
    }
    row.end = static_cast<std::uint32_t>(transitions.size());
    rows.push_back(row);
  };

  for (StateIndex i = 0; i < space.size(); ++i) {
    const ChainState s = space.state_of(i);
    if (space.is_boundary(s)) {
      emit(s, Action::Adopt);
    } else {
      for (Action act : feasible_actions(s, params)) {
        if (keep(s, act)) emit(s, act);
      }
    }
    offsets.push_back(static_cast<std::uint32_t>(rows.size()));
  }
  return std::make_shared<const MiningModel>(params, space, std::move(offsets), std::move(rows),
                                             std::move(transitions));
}

} // namespace

std::shared_ptr<const MiningModel> build_base_model(const MiningParams& params, int truncation) {
  return build_model(params, truncation, [](const ChainState&, Action) { return true; });
}

std::shared_ptr<const MiningModel> build_honest_disabled(const MiningParams& params, int truncation,
                                                         ThresholdVariant variant) {
  if (truncation < 2) throw std::invalid_argument("honest-disabled models need T >= 2");
  return build_model(params, truncation, [variant](const ChainState& s, Action act) {
    if (variant == ThresholdVariant::OverrideDisabledAt10) {
      return !(s.a == 1 && s.h == 0 && act == Action::Override);
    }
    return !(s.a == 0 && s.h == 1 && act == Action::Adopt);
  });
}

double overpaying_terminal_reward(int a, int h, double rho, double alpha, CompensationScope scope) {
  if (!(alpha > 0.0 && alpha < 0.5)) throw std::invalid_argument("alpha must be in (0, 0.5)");
  if (a < 0 || h < 0) throw std::invalid_argument("chain lengths must be nonnegative");
  const double drift = 1.0 - 2.0 * alpha;
  const double excess = alpha * (1.0 - alpha) / (drift * drift);
  if (a > h) {
    const double length = 0.5 * ((a - h) / drift + a + h);
    if (scope == CompensationScope::WholeLength) return (1.0 - rho) * (excess + length);
    return (1.0 - rho) * excess + length;
  }
  const double catch_up = std::pow(alpha / (1.0 - alpha), h - a);
  return (1.0 - catch_up) * (-rho * h) + catch_up * (1.0 - rho) * (excess + (h - a) / drift);
}

ScalarModel build_truncated(std::shared_ptr<const MiningModel> model, BoundaryMode mode, double rho,
                            CompensationScope scope) {
  std::vector<std::pair<std::uint32_t, double>> overrides;
  if (mode == BoundaryMode::OverPaying) {
    const StateSpace& space = model->space();
    const double alpha = model->params().alpha();
    for (StateIndex s = 0; s < space.size(); ++s) {
      const ChainState cs = space.state_of(s);
      if (space.is_boundary(cs)) {
        overrides.emplace_back(model->first_row(s),
                               overpaying_terminal_reward(cs.a, cs.h, rho, alpha, scope));
      }
    }
  }
  return ScalarModel(std::move(model), rho, std::move(overrides));
}

std::string dump_model(const MiningModel& model) {
  std::ostringstream os;
  os.precision(12);
  const StateSpace& space = model.space();
  for (StateIndex s = 0; s < space.size(); ++s) {
    const ChainState cs = space.state_of(s);
    for (const auto& row : model.rows_of(s)) {
      os << cs.a << ',' << cs.h << ',' << to_string(cs.fork) << " | " << to_string(row.action)
         << " ->";
      for (const auto& t : model.transitions_of(row)) {
        const ChainState n = space.state_of(t.next);
        os << " [" << t.probability << ':' << n.a << ',' << n.h << ',' << to_string(n.fork) << ':'
           << t.reward.attacker << ',' << t.reward.honest << ']';
      }
      os << '\n';
    }
  }
  return os.str();
}

std::string_view to_string(ThresholdVariant variant) {
  return variant == ThresholdVariant::OverrideDisabledAt10 ? "override-disabled-at-(1,0)"
                                                           : "adopt-disabled-at-(0,1)";
}

} // namespace selfish
