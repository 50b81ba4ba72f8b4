#pragma once

#include <stdexcept>

#include "cogrelay/rng.hpp"

namespace cogrelay {

/**
 * Two-state Markov-modulated Bernoulli arrival process. The chain state is
 * the arrival indicator itself: state 1 means a packet arrives in the slot.
 *
 * lambda = P(no arrival next | no arrival now)
 * beta   = P(no arrival next | arrival now)
 */
struct MmbpParams {
  double lambda = 0.5;
  double beta = 0.5;
};

struct ArrivalChainState {
  int had_arrival = 0;
};

/**
 * Gilbert-Elliott on/off channel.
 *
 * gamma = P(on next | off now)
 * q     = P(off next | on now)
 */
struct ChannelParams {
  double gamma = 0.5;
  double q = 0.5;
};

struct ChannelState {
  int connected = 0;
};

inline void check_valid(const MmbpParams& p) {
  if (!(p.lambda >= 0.0 && p.lambda <= 1.0) ||
      !(p.beta >= 0.0 && p.beta <= 1.0)) {
    throw std::invalid_argument("arrival probabilities must lie in [0, 1]");
  }
}

inline void check_valid(const ChannelParams& p) {
  if (!(p.gamma >= 0.0 && p.gamma <= 1.0) || !(p.q >= 0.0 && p.q <= 1.0)) {
    throw std::invalid_argument("channel probabilities must lie in [0, 1]");
  }
}

// Transition by inverse CDF on the current row, one uniform per step.
// Probability mass for "no arrival" occupies [0, p_row0).
inline ArrivalChainState mmbp_next(ArrivalChainState s, const MmbpParams& p,
                                   double u) {
  const double p_no_arrival = s.had_arrival ? p.beta : p.lambda;
  return ArrivalChainState{u < p_no_arrival ? 0 : 1};
}

struct MmbpStep {
  ArrivalChainState next;
  int arrival;  // indicator for the slot being entered
};

inline MmbpStep mmbp_step(ArrivalChainState s, const MmbpParams& p,
                          RngStream& rng) {
  const ArrivalChainState n = mmbp_next(s, p, rng.uniform());
  return MmbpStep{n, n.had_arrival};
}

// Long-run fraction of slots with an arrival: (1-lambda) / ((1-lambda)+beta).
// Undefined when the chain is absorbing in both states (lambda=1, beta=0).
inline double mmbp_stationary_arrival_prob(const MmbpParams& p) {
  const double denom = (1.0 - p.lambda) + p.beta;
  if (denom <= 0.0) {
    throw std::domain_error(
        "arrival chain has no unique stationary distribution "
        "(lambda = 1 and beta = 0)");
  }
  return (1.0 - p.lambda) / denom;
}

// Mass for "on" occupies [0, gamma) from off, [q, 1) from on.
inline ChannelState channel_next(ChannelState s, const ChannelParams& p,
                                 double u) {
  if (s.connected) return ChannelState{u < p.q ? 0 : 1};
  return ChannelState{u < p.gamma ? 1 : 0};
}

inline ChannelState channel_step(ChannelState s, const ChannelParams& p,
                                 RngStream& rng) {
  return channel_next(s, p, rng.uniform());
}

// Long-run fraction of slots with the link up: gamma / (gamma + q).
// Undefined when both states are absorbing (gamma = q = 0).
inline double channel_stationary_on_prob(const ChannelParams& p) {
  const double denom = p.gamma + p.q;
  if (denom <= 0.0) {
    throw std::domain_error(
        "channel has no unique stationary distribution (gamma = q = 0)");
  }
  return p.gamma / denom;
}

// Draw the initial chain state from the stationary distribution. A chain
// frozen in one state (denominator 0) starts in the no-arrival state.
inline ArrivalChainState mmbp_stationary_sample(const MmbpParams& p,
                                                RngStream& rng) {
  const double denom = (1.0 - p.lambda) + p.beta;
  const double p_one = denom > 0.0 ? (1.0 - p.lambda) / denom : 0.0;
  return ArrivalChainState{rng.uniform() < p_one ? 1 : 0};
}

inline ChannelState channel_stationary_sample(const ChannelParams& p,
                                              RngStream& rng) {
  const double denom = p.gamma + p.q;
  const double p_on = denom > 0.0 ? p.gamma / denom : 0.0;
  return ChannelState{rng.uniform() < p_on ? 1 : 0};
}

}  // namespace cogrelay
