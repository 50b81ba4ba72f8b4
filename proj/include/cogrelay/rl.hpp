#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cogrelay/simcore.hpp"

namespace cogrelay {

/**
 * Uniform quantization of the secondary's queue lengths into N occupancy
 * bands: 0 is reserved for the empty queue, band h covers (v_{h-1}, v_h],
 * and the top band is everything above the last threshold. N=2 needs no
 * thresholds (empty / nonempty).
 */
class LevelScheme {
 public:
  LevelScheme(int n_levels, std::vector<int> thresholds);

  int n_levels() const { return n_levels_; }
  const std::vector<int>& thresholds() const { return thresholds_; }

  int quantize(int len) const;

  // pu_active and four channel bits, then three quantized queue levels.
  std::size_t state_count() const {
    const std::size_t n = static_cast<std::size_t>(n_levels_);
    return 32 * n * n * n;
  }

 private:
  int n_levels_;
  std::vector<int> thresholds_;
};

inline int quantize_level(int len, const LevelScheme& scheme) {
  return scheme.quantize(len);
}

using StateIndex = std::uint32_t;

StateIndex encode_state(const Observation& obs, const LevelScheme& scheme);

// Inverse of encode_state up to the quantized view; levels come back as
// band indices, not lengths. Used by tests and the oracle lift.
struct DecodedState {
  int pu_active = 0;
  int ch_sp = 0, ch_s = 0, ch_p = 0, ch_ps = 0;
  int level_ps = 0, level_se = 0, level_s = 0;
};

DecodedState decode_state(StateIndex index, const LevelScheme& scheme);

/**
 * Allowed-action set. The cooperative agent may use all four actions; the
 * non-cooperative baseline is restricted to transmitting its own data or
 * idling, so it never touches the relaying machinery.
 */
struct ActionMask {
  std::array<bool, kNumActions> allowed{};

  static ActionMask all() { return ActionMask{{true, true, true, true}}; }
  static ActionMask own_traffic_only() {
    return ActionMask{{true, false, false, true}};
  }

  bool contains(ActionId a) const { return allowed[static_cast<int>(a)]; }
  int count() const {
    int c = 0;
    for (bool b : allowed) c += b ? 1 : 0;
    return c;
  }
  std::uint32_t bits() const {
    std::uint32_t b = 0;
    for (int i = 0; i < kNumActions; ++i) {
      if (allowed[i]) b |= 1u << i;
    }
    return b;
  }
  static ActionMask from_bits(std::uint32_t b) {
    ActionMask m;
    for (int i = 0; i < kNumActions; ++i) m.allowed[i] = (b >> i) & 1u;
    return m;
  }
  bool operator==(const ActionMask&) const = default;
};

struct RewardParams {
  double omega = 0.5;
  double penalty_k = 10.0;
  // The relay-outage penalty reads the sp link by default (the link a2
  // actually uses). The literal variant charges against the ps link instead.
  bool a2_penalty_uses_ps_link = false;
};

void check_valid(const RewardParams& rp);

// Slot-start indicators the reward needs beyond the action and outcome.
struct RewardInputs {
  int pu_active = 0;
  int ch_p = 0, ch_s = 0, ch_ps = 0, ch_sp = 0;
  int q_s_nonempty = 0, q_ps_nonempty = 0, q_se_nonempty = 0;
  int q_ps_full = 0;
};

RewardInputs reward_inputs(const NetworkState& st);

// Weighted service reward minus K times the count of penalty events
// (collision, hopeless transmit attempts, a full or pointless accept).
double reward(const RewardInputs& in, ActionId action, int r_s, int r_ps,
              const RewardParams& rp);

class QTable {
 public:
  QTable(std::size_t n_states, double alpha, double gamma);

  std::size_t n_states() const { return n_states_; }
  double alpha() const { return alpha_; }
  double gamma() const { return gamma_; }

  double at(StateIndex s, ActionId a) const {
    return values_[s * kNumActions + static_cast<int>(a)];
  }
  void set(StateIndex s, ActionId a, double v) {
    values_[s * kNumActions + static_cast<int>(a)] = v;
  }
  std::uint32_t visits(StateIndex s, ActionId a) const {
    return visits_[s * kNumActions + static_cast<int>(a)];
  }

  double max_over(StateIndex s, const ActionMask& mask) const;

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  friend void q_update(QTable& table, StateIndex s, ActionId a, double r,
                       StateIndex s_next, const ActionMask& mask);

 private:
  std::size_t n_states_;
  double alpha_;
  double gamma_;
  std::vector<double> values_;
  std::vector<std::uint32_t> visits_;
};

void q_update(QTable& table, StateIndex s, ActionId a, double r,
              StateIndex s_next, const ActionMask& mask);

// Epsilon-greedy over the mask: explore with probability mu during the first
// 60% of the horizon, never afterwards; greedy ties break uniformly at
// random from the same stream.
ActionId select_action(const QTable& table, StateIndex s, double mu,
                       std::uint64_t t, std::uint64_t horizon,
                       const ActionMask& mask, RngStream& rng);

struct Policy {
  std::vector<std::uint8_t> action;  // indexed by StateIndex
  ActionMask mask = ActionMask::all();

  ActionId at(StateIndex s) const {
    return static_cast<ActionId>(action[s]);
  }
};

// Deterministic extraction: per-state argmax over mask, ties to the lowest
// action index.
Policy greedy_policy(const QTable& table, const ActionMask& mask);

struct LearnHyper {
  double alpha = 0.5;
  double gamma = 0.9;
  double mu = 0.05;
  std::uint64_t horizon = 300000;
  std::uint64_t curve_window = 1000;
};

void check_valid(const LearnHyper& hyper);

struct CurvePoint {
  std::uint64_t slot_end = 0;  // exclusive end of the averaging window
  double mean_reward = 0.0;
};

struct TrainResult {
  QTable table;
  Policy policy;
  std::vector<CurvePoint> curve;
};

// One continuing episode of hyper.horizon slots: sense, act, observe the
// reward and next observation, update. Fresh zero table each call.
TrainResult train(const ModelParams& mp, const RewardParams& rp,
                  const LevelScheme& scheme, const LearnHyper& hyper,
                  const ActionMask& mask, std::uint64_t seed);

}  // namespace cogrelay
