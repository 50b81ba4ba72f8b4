#pragma once

#include <cstdint>
#include <utility>

#include "cogrelay/stochastic.hpp"

namespace cogrelay {

struct QueueState {
  int len = 0;
  int capacity = 0;
};

// Secondary user's slot decision.
enum class ActionId : int {
  TransmitOwn = 0,    // send the head of the own-data queue
  TransmitRelay = 1,  // send the head of the relaying queue
  AcceptPrimary = 2,  // listen for a primary packet to relay later
  Idle = 3,
};

inline constexpr int kNumActions = 4;

/**
 * Full network configuration at a slot boundary: the five queues, the four
 * links and the four arrival chains. Queue lengths are exact here; the
 * learner sees only the quantized view (see rl.hpp).
 *
 * Queues: q_p primary data, q_pe primary energy, q_s secondary own data,
 * q_ps relayed primary data held at the secondary, q_se secondary energy.
 *
 * Links: ch_p primary->destination, ch_s secondary->destination,
 * ch_ps primary->secondary, ch_sp secondary->primary destination.
 */
struct NetworkState {
  QueueState q_p, q_pe, q_s, q_ps, q_se;
  ChannelState ch_p, ch_s, ch_ps, ch_sp;
  ArrivalChainState arr_p, arr_pe, arr_s, arr_se;
  std::uint64_t slot = 0;
};

struct QueueCapacities {
  int p = 20, pe = 20, s = 20, ps = 20, se = 20;
};

struct ModelParams {
  QueueCapacities capacity;
  MmbpParams arrival_p, arrival_pe, arrival_s, arrival_se;
  ChannelParams channel_p, channel_s, channel_ps, channel_sp;
  // Alternative decode rule: the destination also decodes a direct primary
  // transmission while the secondary is in accept mode. Off by default; the
  // default charges the accept action for the lost direct reception.
  bool pu_decodes_during_accept = false;
};

void check_valid(const ModelParams& mp);

/**
 * Everything that happened in one slot: departures, admissions, arrivals and
 * the derived event flags. Service indicators are evaluated on the slot-start
 * state; arrivals land after departures.
 */
struct SlotOutcome {
  int r_s = 0;      // own-data packet left q_s over ch_s
  int r_ps = 0;     // relayed packet left q_ps over ch_sp
  int a_ps_in = 0;  // primary packet admitted into q_ps
  int r_se = 0;     // energy unit consumed from q_se
  int r_p = 0;      // primary packet left q_p (delivered either way)
  int r_pe = 0;     // primary energy unit consumed from q_pe
  int arrivals_p = 0, arrivals_pe = 0, arrivals_s = 0, arrivals_se = 0;
  int pu_active = 0;         // primary transmits this slot
  int direct_delivery = 0;   // primary packet decoded at the destination
  int relayed_delivery = 0;  // primary packet delivered via the secondary
  int collision = 0;         // secondary transmitted onto an active primary
  int energy_wasted = 0;     // energy spent on a transmission that failed
  // Arrivals lost to a full queue (data packets or energy units).
  int drop_p = 0, drop_pe = 0, drop_s = 0, drop_ps = 0, drop_se = 0;
};

// One independent stream per stochastic process, all derived from a single
// root so a run is reproducible from one seed.
struct SimStreams {
  RngStream arr_p, arr_pe, arr_s, arr_se;
  RngStream ch_p, ch_s, ch_ps, ch_sp;

  explicit SimStreams(const RngStream& root)
      : arr_p(root.substream("arrival.p")),
        arr_pe(root.substream("arrival.pe")),
        arr_s(root.substream("arrival.s")),
        arr_se(root.substream("arrival.se")),
        ch_p(root.substream("channel.p")),
        ch_s(root.substream("channel.s")),
        ch_ps(root.substream("channel.ps")),
        ch_sp(root.substream("channel.sp")) {}
};

// The primary transmits iff it has both a packet and energy.
inline int pu_active(const NetworkState& st) {
  return (st.q_p.len > 0 && st.q_pe.len > 0) ? 1 : 0;
}

// What the secondary can sense at the slot boundary. Exact queue lengths of
// the primary's queues are hidden; only the activity indicator leaks out.
struct Observation {
  int pu_active = 0;
  int q_s_len = 0, q_ps_len = 0, q_se_len = 0;
  int ch_p = 0, ch_s = 0, ch_ps = 0, ch_sp = 0;
};

Observation observables(const NetworkState& st);

// Departure/admission indicators for the given slot-start state and action.
// Pure: no arrivals, no queue updates.
SlotOutcome service_indicators(const NetworkState& st, ActionId action,
                               const ModelParams& mp);

// Advance one slot: indicators on the current state, then departures, then
// fresh arrivals (which can be dropped at a full queue), then channel and
// arrival chain transitions.
std::pair<NetworkState, SlotOutcome> step(const NetworkState& st,
                                          ActionId action,
                                          const ModelParams& mp,
                                          SimStreams& streams);

// Empty queues; chains and channels drawn from their stationary laws.
NetworkState initial_state(const ModelParams& mp, SimStreams& streams);

}  // namespace cogrelay
