#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cogrelay/experiment.hpp"
#include "cogrelay/rl.hpp"
#include "cogrelay/simcore.hpp"

namespace cogrelay {

/**
 * Dense enumeration of the exact NetworkState for small instances: every
 * combination of the five queue lengths, four arrival bits and four channel
 * bits. Index layout is (queues, arrivals, channels) mixed-radix with the
 * channel bits fastest, which the solver exploits to factor the transition
 * kernel.
 */
class FullStateSpace {
 public:
  FullStateSpace(const ModelParams& mp, std::size_t state_ceiling);

  std::size_t size() const { return n_states_; }
  std::size_t queue_configs() const { return n_queue_; }

  std::size_t index(const NetworkState& st) const;
  NetworkState state(std::size_t index) const;

  const ModelParams& model() const { return mp_; }

 private:
  ModelParams mp_;
  std::size_t dim_[5];  // capacity + 1 per queue
  std::size_t n_queue_ = 0;
  std::size_t n_states_ = 0;
};

struct OracleInstance {
  ModelParams model;
  RewardParams reward;
  double discount = 0.9;
  std::size_t state_ceiling = 1000000;
  ActionMask mask = ActionMask::all();
};

struct OracleSolution {
  std::vector<double> values;          // V* per full-state index
  std::vector<std::uint8_t> actions;   // greedy action per state
  std::size_t sweeps = 0;
  double residual = 0.0;               // last sup-norm change
  double min_sweep_increment = 0.0;    // most negative per-sweep change seen
};

/**
 * Exact dynamic programming on the enumerated state space: iterate
 * V <- max_a [ R(s,a) + discount * E V(s') ] until the sup-norm change
 * drops below tol. R is deterministic given the full state, so its
 * expectation is itself. The returned fixed point is within
 * tol * discount / (1 - discount) of optimal in sup-norm.
 */
OracleSolution value_iteration(const OracleInstance& inst, double tol);

// Explicit next-state distribution of one (state, action) pair, assembled
// term by term from the arrival/channel product chain: 256 entries. This is
// the slow reference path used to cross-check the factored solver.
std::vector<std::pair<std::size_t, double>> transition_row(
    const OracleInstance& inst, std::size_t state_index, ActionId action);

struct GapReport {
  double oracle_mean_reward = 0.0;
  double learned_mean_reward = 0.0;
  double gap = 0.0;  // (oracle - learned) / max(|oracle|, eps)
  std::vector<double> oracle_per_seed;
  std::vector<double> learned_per_seed;
};

// Long-run mean-reward comparison on shared seeds between the exact policy
// and a learned policy lifted through the quantized observation map.
GapReport oracle_gap(const Policy& learned, const LevelScheme& scheme,
                     const OracleInstance& inst, const OracleSolution& sol,
                     std::uint64_t eval_horizon,
                     const std::vector<std::uint64_t>& seeds);

}  // namespace cogrelay
