#include "cogrelay/simcore.hpp"

#include <stdexcept>

namespace cogrelay {

void check_valid(const ModelParams& mp) {
  const int caps[] = {mp.capacity.p, mp.capacity.pe, mp.capacity.s,
                      mp.capacity.ps, mp.capacity.se};
  for (int c : caps) {
    if (c < 1) throw std::invalid_argument("queue capacities must be >= 1");
  }
  check_valid(mp.arrival_p);
  check_valid(mp.arrival_pe);
  check_valid(mp.arrival_s);
  check_valid(mp.arrival_se);
  check_valid(mp.channel_p);
  check_valid(mp.channel_s);
  check_valid(mp.channel_ps);
  check_valid(mp.channel_sp);
}

Observation observables(const NetworkState& st) {
  Observation o;
  o.pu_active = pu_active(st);
  o.q_s_len = st.q_s.len;
  o.q_ps_len = st.q_ps.len;
  o.q_se_len = st.q_se.len;
  o.ch_p = st.ch_p.connected;
  o.ch_s = st.ch_s.connected;
  o.ch_ps = st.ch_ps.connected;
  o.ch_sp = st.ch_sp.connected;
  return o;
}

SlotOutcome service_indicators(const NetworkState& st, ActionId action,
                               const ModelParams& mp) {
  SlotOutcome out;
  const int a1 = action == ActionId::TransmitOwn ? 1 : 0;
  const int a2 = action == ActionId::TransmitRelay ? 1 : 0;
  const int a3 = action == ActionId::AcceptPrimary ? 1 : 0;
  const int a4 = action == ActionId::Idle ? 1 : 0;

  const int act = pu_active(st);
  const int has_p = st.q_p.len > 0;
  const int has_pe = st.q_pe.len > 0;
  const int has_s = st.q_s.len > 0;
  const int has_ps = st.q_ps.len > 0;
  const int has_se = st.q_se.len > 0;
  const int ps_room = st.q_ps.len < st.q_ps.capacity;
  const int ch_p = st.ch_p.connected;
  const int ch_s = st.ch_s.connected;
  const int ch_ps = st.ch_ps.connected;
  const int ch_sp = st.ch_sp.connected;

  out.pu_active = act;

  // Secondary departures need energy and a clear band.
  out.r_s = a1 & ch_s & (1 - act) & has_se;
  out.r_ps = a2 & ch_sp & (1 - act) & has_se;

  // The secondary captures a primary packet only when the direct link is
  // down, the overheard link is up, and the relay queue has room.
  out.a_ps_in = a3 & act & ch_ps & (1 - ch_p) & ps_room;

  // Energy is consumed by the attempt, not the outcome.
  out.r_se = (a1 & has_s) | (a2 & has_ps);

  // Direct decode happens while the secondary stays quiet in receive mode.
  const int listen = mp.pu_decodes_during_accept ? (a4 | a3) : a4;
  out.direct_delivery = listen & ch_p & act;
  out.relayed_delivery = out.r_ps;

  // Literal service forms; the queue clamp absorbs the q_p=0 corner where
  // r_p=1 finds nothing to remove, and likewise r_pe=1 against q_pe=0.
  out.r_p = has_pe & ((listen & ch_p) | (a3 & ch_ps & (1 - ch_p) & ps_room));
  out.r_pe = has_p;

  out.collision = act & (a1 | a2);
  out.energy_wasted = (a1 | a2) & has_se & (1 - (out.r_s | out.r_ps));
  return out;
}

namespace {

// Departures first, then the arrival; one slot handles at most one of each.
// Returns the new length and flags a drop when the arrival finds no room.
int advance_queue(int len, int depart, int arrival, int capacity, int* drop) {
  int after = len - depart;
  if (after < 0) after = 0;
  if (arrival) {
    if (after < capacity) {
      ++after;
    } else if (drop) {
      *drop = 1;
    }
  }
  return after;
}

}  // namespace

std::pair<NetworkState, SlotOutcome> step(const NetworkState& st,
                                          ActionId action,
                                          const ModelParams& mp,
                                          SimStreams& streams) {
  SlotOutcome out = service_indicators(st, action, mp);
  NetworkState next = st;

  const MmbpStep ap = mmbp_step(st.arr_p, mp.arrival_p, streams.arr_p);
  const MmbpStep ape = mmbp_step(st.arr_pe, mp.arrival_pe, streams.arr_pe);
  const MmbpStep as = mmbp_step(st.arr_s, mp.arrival_s, streams.arr_s);
  const MmbpStep ase = mmbp_step(st.arr_se, mp.arrival_se, streams.arr_se);
  next.arr_p = ap.next;
  next.arr_pe = ape.next;
  next.arr_s = as.next;
  next.arr_se = ase.next;
  out.arrivals_p = ap.arrival;
  out.arrivals_pe = ape.arrival;
  out.arrivals_s = as.arrival;
  out.arrivals_se = ase.arrival;

  next.q_p.len = advance_queue(st.q_p.len, out.r_p, ap.arrival,
                               st.q_p.capacity, &out.drop_p);
  next.q_pe.len = advance_queue(st.q_pe.len, out.r_pe, ape.arrival,
                                st.q_pe.capacity, &out.drop_pe);
  next.q_s.len = advance_queue(st.q_s.len, out.r_s, as.arrival,
                               st.q_s.capacity, &out.drop_s);
  next.q_ps.len = advance_queue(st.q_ps.len, out.r_ps, out.a_ps_in,
                                st.q_ps.capacity, &out.drop_ps);
  next.q_se.len = advance_queue(st.q_se.len, out.r_se, ase.arrival,
                                st.q_se.capacity, &out.drop_se);

  next.ch_p = channel_step(st.ch_p, mp.channel_p, streams.ch_p);
  next.ch_s = channel_step(st.ch_s, mp.channel_s, streams.ch_s);
  next.ch_ps = channel_step(st.ch_ps, mp.channel_ps, streams.ch_ps);
  next.ch_sp = channel_step(st.ch_sp, mp.channel_sp, streams.ch_sp);

  next.slot = st.slot + 1;
  return {next, out};
}

NetworkState initial_state(const ModelParams& mp, SimStreams& streams) {
  NetworkState st;
  st.q_p = {0, mp.capacity.p};
  st.q_pe = {0, mp.capacity.pe};
  st.q_s = {0, mp.capacity.s};
  st.q_ps = {0, mp.capacity.ps};
  st.q_se = {0, mp.capacity.se};
  st.arr_p = mmbp_stationary_sample(mp.arrival_p, streams.arr_p);
  st.arr_pe = mmbp_stationary_sample(mp.arrival_pe, streams.arr_pe);
  st.arr_s = mmbp_stationary_sample(mp.arrival_s, streams.arr_s);
  st.arr_se = mmbp_stationary_sample(mp.arrival_se, streams.arr_se);
  st.ch_p = channel_stationary_sample(mp.channel_p, streams.ch_p);
  st.ch_s = channel_stationary_sample(mp.channel_s, streams.ch_s);
  st.ch_ps = channel_stationary_sample(mp.channel_ps, streams.ch_ps);
  st.ch_sp = channel_stationary_sample(mp.channel_sp, streams.ch_sp);
  return st;
}

}  // namespace cogrelay
