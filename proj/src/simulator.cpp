#include "selfish/simulator.hpp"

#include "selfish/mdp_engine.hpp"
#include "selfish/transitions.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

namespace selfish {

namespace {

/// 53-bit uniform in [0, 1), independent of the standard library's distributions.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

} // namespace

SimResult simulate_policy(const SimConfig& config) {
  if (config.rounds < 1) throw std::invalid_argument("rounds must be at least 1");
  const MiningParams& params = config.params;
  const int T = config.policy.truncation();
  std::mt19937_64 rng(config.seed);

  SimResult out;
  out.seed = config.seed;

  // Per-cycle sums for the regenerative variance estimate.
  double cycle_attacker = 0.0;
  double cycle_total = 0.0;
  std::vector<std::pair<double, double>> cycles;

  // The first round only decides who mined the first block.
  ChainState s = uniform01(rng) < params.alpha() ? ChainState{1, 0, Fork::Irrelevant}
                                                 : ChainState{0, 1, Fork::Irrelevant};
  for (std::uint64_t round = 1; round < config.rounds; ++round) {
    Action act;
    if (s.a >= T || s.h >= T) {
      act = config.sm1_tail ? sm1_policy(s) : Action::Adopt;
    } else {
      act = config.policy(s);
      if (!is_feasible(act, s, params)) throw InfeasiblePolicyError(s, act);
    }

    const OutcomeSet outcomes = action_outcomes(s, act, params);
    BlockEvent event = BlockEvent::HonestBlock;
    if (uniform01(rng) < params.alpha()) {
      event = BlockEvent::AttackerBlock;
    } else if (is_race(act, s) && uniform01(rng) < params.race_win_probability()) {
      event = BlockEvent::HonestOnAttackerSide;
    }
    const Outcome& o = outcomes.for_event(event);
    out.attacker_blocks += static_cast<std::uint64_t>(o.reward.attacker);
    out.honest_blocks += static_cast<std::uint64_t>(o.reward.honest);
    cycle_attacker += o.reward.attacker;
    cycle_total += o.reward.attacker + o.reward.honest;
    if (act == Action::Adopt) {
      cycles.emplace_back(cycle_attacker, cycle_total);
      cycle_attacker = 0.0;
      cycle_total = 0.0;
    }
    s = o.next;
  }

  out.rounds = config.rounds;
  const double total = static_cast<double>(out.attacker_blocks + out.honest_blocks);
  out.rev = total > 0.0 ? static_cast<double>(out.attacker_blocks) / total : 0.0;
  out.cycles = cycles.size();
  if (cycles.size() >= 2) {
    double sum_a = 0.0;
    double sum_n = 0.0;
    for (const auto& [a, n] : cycles) {
      sum_a += a;
      sum_n += n;
    }
    const double k = static_cast<double>(cycles.size());
    const double ratio = sum_n > 0.0 ? sum_a / sum_n : 0.0;
    double ss = 0.0;
    for (const auto& [a, n] : cycles) ss += (a - ratio * n) * (a - ratio * n);
    const double mean_n = sum_n / k;
    out.std_error = mean_n > 0.0 ? std::sqrt(ss / (k * (k - 1.0))) / mean_n : 0.0;
  }
  return out;
}

BatchResult simulate_batch(const SimConfig& config, std::size_t replicas, std::uint64_t seed_stride,
                           unsigned jobs) {
  if (replicas < 2) throw std::invalid_argument("a batch needs at least 2 replicas");
  BatchResult batch;
  batch.replicas.resize(replicas);

  auto run = [&](std::size_t k) {
    SimConfig c = config;
    c.seed = config.seed + static_cast<std::uint64_t>(k) * seed_stride;
    batch.replicas[k] = simulate_policy(c);
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(replicas)));
  if (jobs == 1) {
    for (std::size_t k = 0; k < replicas; ++k) run(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (unsigned w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        try {
          for (std::size_t k = next++; k < replicas; k = next++) run(k);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
    for (auto& t : workers) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  double sum = 0.0;
  for (const auto& r : batch.replicas) sum += r.rev;
  batch.mean_rev = sum / static_cast<double>(replicas);
  double ss = 0.0;
  for (const auto& r : batch.replicas) ss += (r.rev - batch.mean_rev) * (r.rev - batch.mean_rev);
  batch.sample_std = std::sqrt(ss / static_cast<double>(replicas - 1));
  return batch;
}

} // namespace selfish
