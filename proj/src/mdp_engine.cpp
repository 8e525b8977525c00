#include "selfish/mdp_engine.hpp"

#include "selfish/transitions.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace selfish {

namespace {

constexpr std::size_t kDirectSolveLimit = 50'000;
constexpr double kStationaryTolerance = 1e-12;

std::string describe(const ChainState& s) {
  std::ostringstream os;
  os << '(' << s.a << ',' << s.h << ',' << to_string(s.fork) << ')';
  return os.str();
}

StateIndex reference_state(const StateSpace& space) {
  return space.index_of({1, 0, Fork::Irrelevant});
}

} // namespace

MiningModel::MiningModel(MiningParams params, StateSpace space,
                         std::vector<std::uint32_t> row_offsets, std::vector<ActionRow> rows,
                         std::vector<TransitionEntry> transitions)
    : params_(params), space_(space), row_offsets_(std::move(row_offsets)),
      rows_(std::move(rows)), transitions_(std::move(transitions)) {
  if (row_offsets_.size() != space_.size() + 1 || row_offsets_.back() != rows_.size()) {
    throw std::invalid_argument("row offsets do not cover the state space");
  }
  for (std::size_t s = 0; s < space_.size(); ++s) {
    if (row_offsets_[s] >= row_offsets_[s + 1]) {
      throw std::invalid_argument("state " + describe(space_.state_of(static_cast<StateIndex>(s))) +
                                  " has no available action");
    }
  }
  for (const auto& t : transitions_) {
    if (t.next >= space_.size()) throw std::invalid_argument("transition leaves the grid");
  }

  std::vector<char> seen(space_.size(), 0);
  std::vector<StateIndex> stack;
  for (const auto& [s, p] : initial_distribution()) {
    if (!seen[s]) {
      seen[s] = 1;
      stack.push_back(s);
    }
  }
  while (!stack.empty()) {
    const StateIndex s = stack.back();
    stack.pop_back();
    for (const auto& row : rows_of(s)) {
      for (const auto& t : transitions_of(row)) {
        if (!seen[t.next]) {
          seen[t.next] = 1;
          stack.push_back(t.next);
        }
      }
    }
  }
  for (StateIndex s = 0; s < space_.size(); ++s) {
    if (seen[s]) reachable_.push_back(s);
  }
}

std::int64_t MiningModel::find_row(StateIndex s, Action action) const {
  for (std::uint32_t r = row_offsets_[s]; r < row_offsets_[s + 1]; ++r) {
    if (rows_[r].action == action) return r;
  }
  return -1;
}

std::vector<std::pair<StateIndex, double>> MiningModel::initial_distribution() const {
  return {{space_.index_of({1, 0, Fork::Irrelevant}), params_.alpha()},
          {space_.index_of({0, 1, Fork::Irrelevant}), 1.0 - params_.alpha()}};
}

ScalarModel::ScalarModel(std::shared_ptr<const MiningModel> model, double rho,
                         std::vector<std::pair<std::uint32_t, double>> row_overrides)
    : model_(std::move(model)), rho_(rho), overrides_(std::move(row_overrides)) {
  if (!model_) throw std::invalid_argument("scalar model needs a base model");
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must be in [0, 1]");
  for (const auto& [row, value] : overrides_) {
    if (row >= model_->rows().size()) throw std::invalid_argument("reward override row out of range");
    if (!std::isfinite(value)) throw std::invalid_argument("reward override must be finite");
  }
}

std::vector<double> ScalarModel::expected_row_rewards() const {
  const auto& rows = model_->rows();
  std::vector<double> out(rows.size(), 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    double acc = 0.0;
    for (const auto& t : model_->transitions_of(rows[r])) acc += t.probability * transform(t.reward);
    out[r] = acc;
  }
  for (const auto& [row, value] : overrides_) out[row] = value;
  return out;
}

ConvergenceError::ConvergenceError(std::size_t iterations, double span)
    : std::runtime_error("value iteration did not converge after " + std::to_string(iterations) +
                         " iterations (span " + std::to_string(span) + ")"),
      iterations_(iterations), span_(span) {}

SolveResult solve_average_reward(const ScalarModel& scalar, const SolverOptions& options,
                                 std::span<const double> warm_start) {
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("solver tolerance must be positive");
  if (!(options.damping >= 0.0 && options.damping < 1.0)) {
    throw std::invalid_argument("damping must be in [0, 1)");
  }
  const MiningModel& model = scalar.model();
  const auto& rows = model.rows();
  const auto& trans = model.transitions();
  const std::vector<double> row_reward = scalar.expected_row_rewards();
  const std::vector<StateIndex>& active = model.reachable_states();
  const StateIndex ref = reference_state(model.space());

  std::vector<double> values(model.num_states(), 0.0);
  if (warm_start.size() == values.size()) {
    std::copy(warm_start.begin(), warm_start.end(), values.begin());
  }
  std::vector<double> next(values);

  auto backup = [&](StateIndex s, const std::vector<double>& v) {
    double best = -std::numeric_limits<double>::infinity();
    const auto state_rows = model.rows_of(s);
    for (const auto& row : state_rows) {
      double q = row_reward[static_cast<std::size_t>(&row - rows.data())];
      for (std::uint32_t t = row.begin; t < row.end; ++t) q += trans[t].probability * v[trans[t].next];
      if (q > best) best = q;
    }
    return best;
  };

  const double keep = options.damping;
  double span = std::numeric_limits<double>::infinity();
  double gain = 0.0;
  std::size_t iter = 0;
  while (true) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (StateIndex s : active) {
      const double b = backup(s, values);
      const double d = b - values[s];
      lo = std::min(lo, d);
      hi = std::max(hi, d);
      next[s] = (1.0 - keep) * b + keep * values[s];
    }
    ++iter;
    span = hi - lo;
    gain = 0.5 * (lo + hi);
    if (span <= options.tolerance) break;
    if (iter >= options.max_iterations) throw ConvergenceError(iter, span);
    const double shift = next[ref];
    for (StateIndex s : active) values[s] = next[s] - shift;
  }

  std::vector<Action> actions(model.num_states(), Action::Adopt);
  for (StateIndex s = 0; s < model.num_states(); ++s) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& row : model.rows_of(s)) {
      double q = row_reward[static_cast<std::size_t>(&row - rows.data())];
      for (std::uint32_t t = row.begin; t < row.end; ++t) q += trans[t].probability * values[trans[t].next];
      if (q > best) {
        best = q;
        actions[s] = row.action;
      }
    }
  }
  const auto& p = model.params();
  Policy policy(model.space(), std::move(actions), {p.alpha(), p.gamma(), p.variant()});
  return SolveResult{std::move(policy), gain, iter, span, std::move(values)};
}

SolveResult solve_average_reward(const ScalarModel& model, double tolerance,
                                 std::size_t max_iterations) {
  SolverOptions options;
  options.tolerance = tolerance;
  options.max_iterations = max_iterations;
  return solve_average_reward(model, options);
}

InfeasiblePolicyError::InfeasiblePolicyError(const ChainState& s, Action action)
    : std::invalid_argument("policy assigns infeasible action '" + std::string(to_string(action)) +
                            "' at state " + describe(s)),
      state_(s) {}

namespace {

/// Row the policy uses at `s`; boundary states fall back to their single terminal row.
std::uint32_t policy_row(const MiningModel& model, const Policy& policy, StateIndex s) {
  const auto rows = model.rows_of(s);
  if (model.space().is_boundary(model.space().state_of(s)) && rows.size() == 1) {
    return model.first_row(s);
  }
  const Action act = policy.at(s);
  const std::int64_t r = model.find_row(s, act);
  if (r < 0) throw InfeasiblePolicyError(model.space().state_of(s), act);
  return static_cast<std::uint32_t>(r);
}

void require_same_grid(const MiningModel& model, const Policy& policy) {
  if (!(model.space() == policy.space())) {
    throw std::invalid_argument("policy truncation T=" + std::to_string(policy.truncation()) +
                                " does not match model T=" + std::to_string(model.truncation()));
  }
}

} // namespace

std::vector<StateIndex> policy_reachable_states(const MiningModel& model, const Policy& policy) {
  require_same_grid(model, policy);
  std::vector<char> seen(model.num_states(), 0);
  std::vector<StateIndex> stack;
  for (const auto& [s, p] : model.initial_distribution()) {
    if (!seen[s]) {
      seen[s] = 1;
      stack.push_back(s);
    }
  }
  while (!stack.empty()) {
    const StateIndex s = stack.back();
    stack.pop_back();
    const ActionRow& row = model.rows()[policy_row(model, policy, s)];
    for (const auto& t : model.transitions_of(row)) {
      if (!seen[t.next]) {
        seen[t.next] = 1;
        stack.push_back(t.next);
      }
    }
  }
  std::vector<StateIndex> out;
  for (StateIndex s = 0; s < model.num_states(); ++s) {
    if (seen[s]) out.push_back(s);
  }
  return out;
}

std::vector<double> stationary_distribution(const MiningModel& model, const Policy& policy,
                                            const std::vector<StateIndex>& states) {
  const auto n = static_cast<Eigen::Index>(states.size());
  std::vector<std::int64_t> local(model.num_states(), -1);
  for (Eigen::Index i = 0; i < n; ++i) local[states[static_cast<std::size_t>(i)]] = i;

  std::vector<Eigen::Triplet<double>> entries;  // P(i -> j) stored at (i, j)
  for (Eigen::Index i = 0; i < n; ++i) {
    const ActionRow& row = model.rows()[policy_row(model, policy, states[static_cast<std::size_t>(i)])];
    for (const auto& t : model.transitions_of(row)) {
      const std::int64_t j = local[t.next];
      if (j < 0) throw std::logic_error("policy closure is not closed");
      entries.emplace_back(i, static_cast<Eigen::Index>(j), t.probability);
    }
  }

  std::vector<double> pi(states.size(), 0.0);
  if (states.size() <= kDirectSolveLimit) {
    // pi (P - I) = 0 with the first balance equation replaced by sum(pi) = 1.
    std::vector<Eigen::Triplet<double>> a;
    a.reserve(entries.size() + 2 * static_cast<std::size_t>(n));
    for (const auto& e : entries) {
      if (e.col() != 0) a.emplace_back(e.col(), e.row(), e.value());
    }
    for (Eigen::Index i = 1; i < n; ++i) a.emplace_back(i, i, -1.0);
    for (Eigen::Index j = 0; j < n; ++j) a.emplace_back(0, j, 1.0);
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(a.begin(), a.end());
    A.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw std::runtime_error("stationary solve: factorization failed");
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b[0] = 1.0;
    Eigen::VectorXd x = lu.solve(b);
    // One step of iterative refinement.
    Eigen::VectorXd r = b - A * x;
    x += lu.solve(r);
    for (Eigen::Index i = 0; i < n; ++i) pi[static_cast<std::size_t>(i)] = x[i];
  } else {
    // Lazy chain (P + I)/2 shares the stationary law and is aperiodic.
    Eigen::SparseMatrix<double> P(n, n);
    P.setFromTriplets(entries.begin(), entries.end());
    Eigen::SparseMatrix<double> Pt = P.transpose();
    Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    for (int iter = 0; iter < 10'000'000; ++iter) {
      Eigen::VectorXd y = 0.5 * (x + Pt * x);
      y /= y.sum();
      const double delta = (y - x).lpNorm<1>();
      x.swap(y);
      if (delta < kStationaryTolerance) break;
    }
    for (Eigen::Index i = 0; i < n; ++i) pi[static_cast<std::size_t>(i)] = x[i];
  }
  return pi;
}

PolicyEvaluation evaluate_policy_exact(const MiningModel& model, const Policy& policy) {
  const auto states = policy_reachable_states(model, policy);
  const auto pi = stationary_distribution(model, policy, states);
  PolicyEvaluation out;
  out.recurrent_states = states.size();
  for (std::size_t i = 0; i < states.size(); ++i) {
    const ActionRow& row = model.rows()[policy_row(model, policy, states[i])];
    for (const auto& t : model.transitions_of(row)) {
      out.attacker_rate += pi[i] * t.probability * t.reward.attacker;
      out.honest_rate += pi[i] * t.probability * t.reward.honest;
    }
  }
  const double total = out.attacker_rate + out.honest_rate;
  if (!(total > 0.0)) throw std::runtime_error("degenerate policy: no accepted blocks");
  out.rev = out.attacker_rate / total;
  return out;
}

double evaluate_policy_gain(const ScalarModel& scalar, const Policy& policy) {
  const MiningModel& model = scalar.model();
  const auto states = policy_reachable_states(model, policy);
  const auto pi = stationary_distribution(model, policy, states);
  const auto rewards = scalar.expected_row_rewards();
  double gain = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) gain += pi[i] * rewards[policy_row(model, policy, states[i])];
  return gain;
}

ValidationReport validate_model(const MiningModel& model) {
  ValidationReport report;
  const StateSpace& space = model.space();
  const MiningParams& params = model.params();

  ValidationCheck normalization{"normalization", true, ""};
  ValidationCheck rewards{"reward-signs", true, ""};
  ValidationCheck boundary{"boundary-actions", true, ""};
  ValidationCheck feasibility{"feasibility", true, ""};
  ValidationCheck positivity{"positive-probabilities", true, ""};

  auto fail = [](ValidationCheck& check, const std::string& what) {
    if (check.passed) check.detail = what;
    check.passed = false;
  };

  for (StateIndex s = 0; s < model.num_states(); ++s) {
    const ChainState cs = space.state_of(s);
    const auto rows = model.rows_of(s);
    if (space.is_boundary(cs) && (rows.size() != 1 || rows[0].action != Action::Adopt)) {
      fail(boundary, "boundary state " + describe(cs) + " must offer only the terminal action");
    }
    for (const auto& row : rows) {
      const std::string where = describe(cs) + " " + std::string(to_string(row.action));
      if (!space.is_boundary(cs) && !is_feasible(row.action, cs, params)) {
        fail(feasibility, where + " is not a feasible action");
      }
      double sum = 0.0;
      for (const auto& t : model.transitions_of(row)) {
        sum += t.probability;
        if (!(t.probability > 0.0)) fail(positivity, where + " carries a non-positive probability");
        const auto& r = t.reward;
        if (r.attacker < 0 || r.honest < 0) fail(rewards, where + " has a negative reward");
        if (r.attacker > 0) {
          const bool ok = (row.action == Action::Override && r.attacker == cs.h + 1) ||
                          (is_race(row.action, cs) && r.attacker == cs.h);
          if (!ok) fail(rewards, where + " pays the attacker unexpectedly");
        }
        if (r.honest > 0 && !(row.action == Action::Adopt && r.honest == cs.h)) {
          fail(rewards, where + " pays the honest network unexpectedly");
        }
      }
      if (std::abs(sum - 1.0) > 1e-12) {
        std::ostringstream os;
        os.precision(17);
        os << where << " sums to " << sum;
        fail(normalization, os.str());
      }
    }
  }

  report.reachable_states = model.reachable_states().size();
  ValidationCheck reach{"reachability", report.reachable_states >= 2,
                        std::to_string(report.reachable_states) + " reachable states"};
  report.checks = {normalization, positivity, rewards, boundary, feasibility, reach};
  return report;
}

} // namespace selfish
