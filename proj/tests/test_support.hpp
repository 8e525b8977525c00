#pragma once

#include "selfish/chain_mdp.hpp"
#include "selfish/mdp_engine.hpp"
#include "selfish/transitions.hpp"

#include <Eigen/Dense>

#include <deque>
#include <stdexcept>
#include <memory>
#include <vector>

namespace selfish::testing {

/// Row the policy uses at a state (boundary states have only one row).
inline const ActionRow& policy_row(const MiningModel& m, const Policy& pi, StateIndex s) {
  const auto rows = m.rows_of(s);
  if (rows.size() == 1) return rows[0];
  for (const auto& r : rows) {
    if (r.action == pi.at(s)) return r;
  }
  throw std::logic_error("policy action missing");
}

/// Same model with only the policy's row kept at each state.
inline std::shared_ptr<const MiningModel> restrict_to_policy(const MiningModel& m, const Policy& pi) {
  std::vector<std::uint32_t> offsets{0};
  std::vector<ActionRow> rows;
  std::vector<TransitionEntry> trans;
  for (StateIndex s = 0; s < m.num_states(); ++s) {
    const ActionRow& r = policy_row(m, pi, s);
    ActionRow copy{r.action, static_cast<std::uint32_t>(trans.size()), 0};
    for (const auto& t : m.transitions_of(r)) trans.push_back(t);
    copy.end = static_cast<std::uint32_t>(trans.size());
    rows.push_back(copy);
    offsets.push_back(static_cast<std::uint32_t>(rows.size()));
  }
  return std::make_shared<MiningModel>(m.params(), m.space(), offsets, rows, trans);
}

/// Breadth-first closure from the start states following the policy.
inline std::vector<StateIndex> closure(const MiningModel& m, const Policy& pi) {
  std::vector<char> seen(m.num_states(), 0);
  std::deque<StateIndex> todo;
  for (auto [s, p] : m.initial_distribution()) todo.push_back(s);
  std::vector<StateIndex> out;
  while (!todo.empty()) {
    const StateIndex s = todo.front();
    todo.pop_front();
    if (seen[s]) continue;
    seen[s] = 1;
    out.push_back(s);
    for (const auto& t : m.transitions_of(policy_row(m, pi, s))) todo.push_back(t.next);
  }
  return out;
}

struct DenseRates {
  double attacker = 0.0;
  double honest = 0.0;
  double rev() const { return attacker / (attacker + honest); }
};

/// Stationary rates from a dense solve of pi (P - I) = 0 with sum(pi) = 1.
inline DenseRates dense_rates(const MiningModel& m, const Policy& pi) {
  const auto states = closure(m, pi);
  const auto n = static_cast<Eigen::Index>(states.size());
  std::vector<Eigen::Index> pos(m.num_states(), -1);
  for (Eigen::Index i = 0; i < n; ++i) pos[states[i]] = i;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + 1, n);
  Eigen::VectorXd ra = Eigen::VectorXd::Zero(n), rh = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    A(i, i) -= 1.0;
    for (const auto& t : m.transitions_of(policy_row(m, pi, states[i]))) {
      A(pos[t.next], i) += t.probability;
      ra(i) += t.probability * t.reward.attacker;
      rh(i) += t.probability * t.reward.honest;
    }
    A(n, i) = 1.0;
  }
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
  b(n) = 1.0;
  const Eigen::VectorXd dist = A.colPivHouseholderQr().solve(b);
  return {dist.dot(ra), dist.dot(rh)};
}

} // namespace selfish::testing
