#include "cogrelay/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cogrelay {

namespace {

// Bit layouts shared by the index and the factored kernels.
inline unsigned arr_bits(const NetworkState& st) {
  return static_cast<unsigned>(st.arr_p.had_arrival) |
         (st.arr_pe.had_arrival << 1) | (st.arr_s.had_arrival << 2) |
         (st.arr_se.had_arrival << 3);
}

inline unsigned ch_bits(const NetworkState& st) {
  return static_cast<unsigned>(st.ch_p.connected) | (st.ch_s.connected << 1) |
         (st.ch_ps.connected << 2) | (st.ch_sp.connected << 3);
}

inline double mmbp_bit_prob(int cur, int next, const MmbpParams& p) {
  const double p_zero = cur ? p.beta : p.lambda;
  return next ? 1.0 - p_zero : p_zero;
}

inline double channel_bit_prob(int cur, int next, const ChannelParams& p) {
  const double p_on = cur ? 1.0 - p.q : p.gamma;
  return next ? p_on : 1.0 - p_on;
}

}  // namespace

FullStateSpace::FullStateSpace(const ModelParams& mp,
                               std::size_t state_ceiling)
    : mp_(mp) {
  check_valid(mp);
  dim_[0] = static_cast<std::size_t>(mp.capacity.p) + 1;
  dim_[1] = static_cast<std::size_t>(mp.capacity.pe) + 1;
  dim_[2] = static_cast<std::size_t>(mp.capacity.s) + 1;
  dim_[3] = static_cast<std::size_t>(mp.capacity.ps) + 1;
  dim_[4] = static_cast<std::size_t>(mp.capacity.se) + 1;
  n_queue_ = 1;
  for (std::size_t d : dim_) {
    if (n_queue_ > state_ceiling / d + 1) {
      n_queue_ = state_ceiling + 1;  // forces the check below to fail
      break;
    }
    n_queue_ *= d;
  }
  n_states_ = n_queue_ > state_ceiling ? n_queue_ : n_queue_ * 256;
  if (n_states_ > state_ceiling) {
    throw std::runtime_error(
        "exact state space exceeds the ceiling of " +
        std::to_string(state_ceiling) +
        " states; reduce the queue capacities of the oracle instance");
  }
}

std::size_t FullStateSpace::index(const NetworkState& st) const {
  const std::size_t q_idx =
      static_cast<std::size_t>(st.q_p.len) +
      dim_[0] * (static_cast<std::size_t>(st.q_pe.len) +
                 dim_[1] * (static_cast<std::size_t>(st.q_s.len) +
                            dim_[2] * (static_cast<std::size_t>(st.q_ps.len) +
                                       dim_[3] * static_cast<std::size_t>(
                                                     st.q_se.len))));
  return (q_idx * 16 + arr_bits(st)) * 16 + ch_bits(st);
}

NetworkState FullStateSpace::state(std::size_t index) const {
  NetworkState st;
  const unsigned ch = index % 16;
  index /= 16;
  const unsigned arr = index % 16;
  std::size_t q_idx = index / 16;

  st.ch_p.connected = ch & 1;
  st.ch_s.connected = (ch >> 1) & 1;
  st.ch_ps.connected = (ch >> 2) & 1;
  st.ch_sp.connected = (ch >> 3) & 1;
  st.arr_p.had_arrival = arr & 1;
  st.arr_pe.had_arrival = (arr >> 1) & 1;
  st.arr_s.had_arrival = (arr >> 2) & 1;
  st.arr_se.had_arrival = (arr >> 3) & 1;

  int lens[5];
  for (int i = 0; i < 5; ++i) {
    lens[i] = static_cast<int>(q_idx % dim_[i]);
    q_idx /= dim_[i];
  }
  st.q_p = {lens[0], mp_.capacity.p};
  st.q_pe = {lens[1], mp_.capacity.pe};
  st.q_s = {lens[2], mp_.capacity.s};
  st.q_ps = {lens[3], mp_.capacity.ps};
  st.q_se = {lens[4], mp_.capacity.se};
  return st;
}

OracleSolution value_iteration(const OracleInstance& inst, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be > 0");
  if (!(inst.discount >= 0.0 && inst.discount < 1.0)) {
    throw std::invalid_argument("discount must lie in [0, 1)");
  }
  check_valid(inst.reward);
  if (inst.mask.count() == 0) throw std::invalid_argument("empty action mask");

  const FullStateSpace space(inst.model, inst.state_ceiling);
  const ModelParams& mp = inst.model;
  const std::size_t n = space.size();
  const std::size_t nq = space.queue_configs();
  const double g = inst.discount;

  // 16x16 kernels for the channel and arrival product chains.
  double p_ch[16][16], p_arr[16][16];
  const ChannelParams* links[4] = {&mp.channel_p, &mp.channel_s,
                                   &mp.channel_ps, &mp.channel_sp};
  const MmbpParams* chains[4] = {&mp.arrival_p, &mp.arrival_pe, &mp.arrival_s,
                                 &mp.arrival_se};
  for (int c = 0; c < 16; ++c) {
    for (int d = 0; d < 16; ++d) {
      double pc = 1.0, pa = 1.0;
      for (int b = 0; b < 4; ++b) {
        pc *= channel_bit_prob((c >> b) & 1, (d >> b) & 1, *links[b]);
        pa *= mmbp_bit_prob((c >> b) & 1, (d >> b) & 1, *chains[b]);
      }
      p_ch[c][d] = pc;
      p_arr[c][d] = pa;
    }
  }

  // Rewards and post-arrival queue indices are deterministic given
  // (queue config, channel bits, action); tabulate them once.
  std::vector<double> reward_tab(nq * 16 * kNumActions);
  std::vector<std::uint32_t> nextq_tab(nq * 16 * kNumActions * 16);

  const int caps[5] = {mp.capacity.p, mp.capacity.pe, mp.capacity.s,
                       mp.capacity.ps, mp.capacity.se};
  const std::size_t stride[5] = {
      1, static_cast<std::size_t>(caps[0] + 1),
      static_cast<std::size_t>((caps[0] + 1)) * (caps[1] + 1),
      static_cast<std::size_t>((caps[0] + 1)) * (caps[1] + 1) * (caps[2] + 1),
      static_cast<std::size_t>((caps[0] + 1)) * (caps[1] + 1) * (caps[2] + 1) *
          (caps[3] + 1)};

  for (std::size_t qi = 0; qi < nq; ++qi) {
    std::size_t rem = qi;
    int lens[5];
    for (int i = 0; i < 5; ++i) {
      lens[i] = static_cast<int>(rem % (caps[i] + 1));
      rem /= caps[i] + 1;
    }
    NetworkState st;
    st.q_p = {lens[0], caps[0]};
    st.q_pe = {lens[1], caps[1]};
    st.q_s = {lens[2], caps[2]};
    st.q_ps = {lens[3], caps[3]};
    st.q_se = {lens[4], caps[4]};
    for (int c = 0; c < 16; ++c) {
      st.ch_p.connected = c & 1;
      st.ch_s.connected = (c >> 1) & 1;
      st.ch_ps.connected = (c >> 2) & 1;
      st.ch_sp.connected = (c >> 3) & 1;
      const RewardInputs in = reward_inputs(st);
      for (int a = 0; a < kNumActions; ++a) {
        const SlotOutcome out =
            service_indicators(st, static_cast<ActionId>(a), mp);
        const std::size_t slot = (qi * 16 + c) * kNumActions + a;
        reward_tab[slot] =
            reward(in, static_cast<ActionId>(a), out.r_s, out.r_ps,
                   inst.reward);

        int base[5];
        base[0] = std::max(lens[0] - out.r_p, 0);
        base[1] = std::max(lens[1] - out.r_pe, 0);
        base[2] = std::max(lens[2] - out.r_s, 0);
        base[3] = std::min(std::max(lens[3] - out.r_ps, 0) + out.a_ps_in,
                           caps[3]);
        base[4] = std::max(lens[4] - out.r_se, 0);
        for (int j = 0; j < 16; ++j) {
          const int np = std::min(base[0] + (j & 1), caps[0]);
          const int npe = std::min(base[1] + ((j >> 1) & 1), caps[1]);
          const int ns = std::min(base[2] + ((j >> 2) & 1), caps[2]);
          const int nse = std::min(base[4] + ((j >> 3) & 1), caps[4]);
          nextq_tab[slot * 16 + j] = static_cast<std::uint32_t>(
              np * stride[0] + npe * stride[1] + ns * stride[2] +
              base[3] * stride[3] + nse * stride[4]);
        }
      }
    }
  }

  const double floor_value =
      -3.0 * inst.reward.penalty_k / (1.0 - g);
  std::vector<double> v(n, floor_value);
  std::vector<double> v_next(n);
  std::vector<double> v_ch(n);  // channel-averaged values, current channel row
  OracleSolution sol;
  sol.actions.assign(n, 0);
  sol.min_sweep_increment = 0.0;

  const std::size_t max_sweeps = 200000;
  for (std::size_t sweep = 1; sweep <= max_sweeps; ++sweep) {
    // Contract the channel dimension first: v_ch[qa, c] = E[v | next
    // queue/arrival part qa, current channels c].
    for (std::size_t qa = 0; qa < n / 16; ++qa) {
      const double* block = &v[qa * 16];
      double* out_block = &v_ch[qa * 16];
      for (int c = 0; c < 16; ++c) {
        const double* row = p_ch[c];
        double acc = 0.0;
        for (int d = 0; d < 16; ++d) acc += row[d] * block[d];
        out_block[c] = acc;
      }
    }

    double residual = 0.0;
    double min_inc = 0.0;
    for (std::size_t qi = 0; qi < nq; ++qi) {
      for (int ai = 0; ai < 16; ++ai) {
        const double* arr_row = p_arr[ai];
        for (int c = 0; c < 16; ++c) {
          double best = 0.0;
          int best_a = -1;
          for (int a = 0; a < kNumActions; ++a) {
            if (!inst.mask.allowed[a]) continue;
            const std::size_t slot = (qi * 16 + c) * kNumActions + a;
            const std::uint32_t* nxt = &nextq_tab[slot * 16];
            double acc = 0.0;
            for (int j = 0; j < 16; ++j) {
              const std::size_t nq_idx = nxt[j];
              acc += arr_row[j] * v_ch[(nq_idx * 16 + j) * 16 + c];
            }
            const double val = reward_tab[slot] + g * acc;
            if (best_a < 0 || val > best) {
              best = val;
              best_a = a;
            }
          }
          const std::size_t idx = (qi * 16 + ai) * 16 + c;
          v_next[idx] = best;
          sol.actions[idx] = static_cast<std::uint8_t>(best_a);
          const double diff = best - v[idx];
          const double mag = std::fabs(diff);
          if (mag > residual) residual = mag;
          if (diff < min_inc) min_inc = diff;
        }
      }
    }
    v.swap(v_next);
    sol.sweeps = sweep;
    sol.residual = residual;
    if (min_inc < sol.min_sweep_increment) sol.min_sweep_increment = min_inc;
    if (residual < tol) {
      sol.values = std::move(v);
      return sol;
    }
  }
  throw std::runtime_error("value iteration failed to converge");
}

std::vector<std::pair<std::size_t, double>> transition_row(
    const OracleInstance& inst, std::size_t state_index, ActionId action) {
  const FullStateSpace space(inst.model, inst.state_ceiling);
  const ModelParams& mp = inst.model;
  const NetworkState st = space.state(state_index);
  const SlotOutcome out = service_indicators(st, action, mp);

  int base[5];
  base[0] = std::max(st.q_p.len - out.r_p, 0);
  base[1] = std::max(st.q_pe.len - out.r_pe, 0);
  base[2] = std::max(st.q_s.len - out.r_s, 0);
  base[3] = std::min(std::max(st.q_ps.len - out.r_ps, 0) + out.a_ps_in,
                     st.q_ps.capacity);
  base[4] = std::max(st.q_se.len - out.r_se, 0);

  const MmbpParams* chains[4] = {&mp.arrival_p, &mp.arrival_pe, &mp.arrival_s,
                                 &mp.arrival_se};
  const int cur_arr[4] = {st.arr_p.had_arrival, st.arr_pe.had_arrival,
                          st.arr_s.had_arrival, st.arr_se.had_arrival};
  const ChannelParams* links[4] = {&mp.channel_p, &mp.channel_s,
                                   &mp.channel_ps, &mp.channel_sp};
  const int cur_ch[4] = {st.ch_p.connected, st.ch_s.connected,
                         st.ch_ps.connected, st.ch_sp.connected};

  std::vector<std::pair<std::size_t, double>> row;
  row.reserve(256);
  for (int j = 0; j < 16; ++j) {
    double pa = 1.0;
    for (int b = 0; b < 4; ++b) {
      pa *= mmbp_bit_prob(cur_arr[b], (j >> b) & 1, *chains[b]);
    }
    NetworkState nx = st;
    nx.q_p.len = std::min(base[0] + (j & 1), st.q_p.capacity);
    nx.q_pe.len = std::min(base[1] + ((j >> 1) & 1), st.q_pe.capacity);
    nx.q_s.len = std::min(base[2] + ((j >> 2) & 1), st.q_s.capacity);
    nx.q_ps.len = base[3];
    nx.q_se.len = std::min(base[4] + ((j >> 3) & 1), st.q_se.capacity);
    nx.arr_p.had_arrival = j & 1;
    nx.arr_pe.had_arrival = (j >> 1) & 1;
    nx.arr_s.had_arrival = (j >> 2) & 1;
    nx.arr_se.had_arrival = (j >> 3) & 1;
    for (int d = 0; d < 16; ++d) {
      double pc = 1.0;
      for (int b = 0; b < 4; ++b) {
        pc *= channel_bit_prob(cur_ch[b], (d >> b) & 1, *links[b]);
      }
      nx.ch_p.connected = d & 1;
      nx.ch_s.connected = (d >> 1) & 1;
      nx.ch_ps.connected = (d >> 2) & 1;
      nx.ch_sp.connected = (d >> 3) & 1;
      row.emplace_back(space.index(nx), pa * pc);
    }
  }
  return row;
}

GapReport oracle_gap(const Policy& learned, const LevelScheme& scheme,
                     const OracleInstance& inst, const OracleSolution& sol,
                     std::uint64_t eval_horizon,
                     const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw std::invalid_argument("oracle gap needs >= 1 seed");
  const FullStateSpace space(inst.model, inst.state_ceiling);
  if (sol.actions.size() != space.size()) {
    throw std::invalid_argument("oracle solution does not match the instance");
  }

  const PolicyFn oracle_fn = [&](const NetworkState& st) {
    return static_cast<ActionId>(sol.actions[space.index(st)]);
  };
  const PolicyFn learned_fn = [&](const NetworkState& st) {
    return learned.at(encode_state(observables(st), scheme));
  };

  GapReport report;
  for (std::uint64_t seed : seeds) {
    report.oracle_per_seed.push_back(
        evaluate_fn(oracle_fn, inst.model, inst.reward, eval_horizon, seed)
            .mean_reward);
    report.learned_per_seed.push_back(
        evaluate_fn(learned_fn, inst.model, inst.reward, eval_horizon, seed)
            .mean_reward);
  }
  double o_sum = 0.0, l_sum = 0.0;
  for (double x : report.oracle_per_seed) o_sum += x;
  for (double x : report.learned_per_seed) l_sum += x;
  report.oracle_mean_reward = o_sum / static_cast<double>(seeds.size());
  report.learned_mean_reward = l_sum / static_cast<double>(seeds.size());
  report.gap = (report.oracle_mean_reward - report.learned_mean_reward) /
               std::max(std::fabs(report.oracle_mean_reward), 1e-12);
  return report;
}

}  // namespace cogrelay
