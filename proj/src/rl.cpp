#include "cogrelay/rl.hpp"

#include <cmath>
#include <stdexcept>

namespace cogrelay {

LevelScheme::LevelScheme(int n_levels, std::vector<int> thresholds)
    : n_levels_(n_levels), thresholds_(std::move(thresholds)) {
  if (n_levels_ < 2) {
    throw std::invalid_argument("level scheme needs at least 2 levels");
  }
  if (static_cast<int>(thresholds_.size()) != n_levels_ - 2) {
    throw std::invalid_argument(
        "level scheme with N levels needs exactly N-2 thresholds");
  }
  int prev = 0;
  for (int v : thresholds_) {
    if (v <= prev) {
      throw std::invalid_argument(
          "level thresholds must be strictly increasing and >= 1");
    }
    prev = v;
  }
}

int LevelScheme::quantize(int len) const {
  if (len < 0) throw std::invalid_argument("queue length must be >= 0");
  if (len == 0) return 0;
  for (std::size_t h = 0; h < thresholds_.size(); ++h) {
    if (len <= thresholds_[h]) return static_cast<int>(h) + 1;
  }
  return n_levels_ - 1;
}

StateIndex encode_state(const Observation& obs, const LevelScheme& scheme) {
  const std::uint32_t n = static_cast<std::uint32_t>(scheme.n_levels());
  const std::uint32_t levels =
      static_cast<std::uint32_t>(scheme.quantize(obs.q_ps_len)) +
      n * (static_cast<std::uint32_t>(scheme.quantize(obs.q_se_len)) +
           n * static_cast<std::uint32_t>(scheme.quantize(obs.q_s_len)));
  return static_cast<StateIndex>(obs.pu_active) | (obs.ch_sp << 1) |
         (obs.ch_s << 2) | (obs.ch_p << 3) | (obs.ch_ps << 4) | (levels << 5);
}

DecodedState decode_state(StateIndex index, const LevelScheme& scheme) {
  const std::uint32_t n = static_cast<std::uint32_t>(scheme.n_levels());
  DecodedState d;
  d.pu_active = index & 1;
  d.ch_sp = (index >> 1) & 1;
  d.ch_s = (index >> 2) & 1;
  d.ch_p = (index >> 3) & 1;
  d.ch_ps = (index >> 4) & 1;
  std::uint32_t levels = index >> 5;
  d.level_ps = static_cast<int>(levels % n);
  levels /= n;
  d.level_se = static_cast<int>(levels % n);
  levels /= n;
  d.level_s = static_cast<int>(levels % n);
  return d;
}

void check_valid(const RewardParams& rp) {
  if (!(rp.omega >= 0.0 && rp.omega <= 1.0)) {
    throw std::invalid_argument("reward omega must lie in [0, 1]");
  }
  if (!(rp.penalty_k >= 0.0)) {
    throw std::invalid_argument("reward penalty must be >= 0");
  }
}

RewardInputs reward_inputs(const NetworkState& st) {
  RewardInputs in;
  in.pu_active = pu_active(st);
  in.ch_p = st.ch_p.connected;
  in.ch_s = st.ch_s.connected;
  in.ch_ps = st.ch_ps.connected;
  in.ch_sp = st.ch_sp.connected;
  in.q_s_nonempty = st.q_s.len > 0;
  in.q_ps_nonempty = st.q_ps.len > 0;
  in.q_se_nonempty = st.q_se.len > 0;
  in.q_ps_full = st.q_ps.len == st.q_ps.capacity;
  return in;
}

double reward(const RewardInputs& in, ActionId action, int r_s, int r_ps,
              const RewardParams& rp) {
  const int a1 = action == ActionId::TransmitOwn ? 1 : 0;
  const int a2 = action == ActionId::TransmitRelay ? 1 : 0;
  const int a3 = action == ActionId::AcceptPrimary ? 1 : 0;

  const double gain = rp.omega * r_s * in.q_s_nonempty +
                      (1.0 - rp.omega) * r_ps * in.q_ps_nonempty;

  const int relay_link = rp.a2_penalty_uses_ps_link ? in.ch_ps : in.ch_sp;
  const int penalties =
      in.pu_active * (a1 + a2) +
      a1 * (1 - in.ch_s * in.q_s_nonempty * in.q_se_nonempty) +
      a2 * (1 - relay_link * in.q_ps_nonempty * in.q_se_nonempty) +
      a3 * in.q_ps_full +
      a3 * (in.ch_p * in.pu_active + (1 - in.ch_ps * in.pu_active));

  return gain - rp.penalty_k * penalties;
}

QTable::QTable(std::size_t n_states, double alpha, double gamma)
    : n_states_(n_states),
      alpha_(alpha),
      gamma_(gamma),
      values_(n_states * kNumActions, 0.0),
      visits_(n_states * kNumActions, 0) {
  if (n_states_ == 0) throw std::invalid_argument("empty state space");
  if (!(alpha_ > 0.0 && alpha_ <= 1.0)) {
    throw std::invalid_argument("learning rate must lie in (0, 1]");
  }
  if (!(gamma_ >= 0.0 && gamma_ < 1.0)) {
    throw std::invalid_argument(
        "discount must lie in [0, 1): the discounted sum diverges at 1");
  }
}

double QTable::max_over(StateIndex s, const ActionMask& mask) const {
  double best = 0.0;
  bool seen = false;
  for (int a = 0; a < kNumActions; ++a) {
    if (!mask.allowed[a]) continue;
    const double v = values_[s * kNumActions + a];
    if (!seen || v > best) {
      best = v;
      seen = true;
    }
  }
  if (!seen) throw std::invalid_argument("empty action mask");
  return best;
}

void q_update(QTable& table, StateIndex s, ActionId a, double r,
              StateIndex s_next, const ActionMask& mask) {
  if (!std::isfinite(r)) {
    throw std::invalid_argument("reward must be finite");
  }
  const std::size_t idx = s * kNumActions + static_cast<int>(a);
  double& q = table.values_[idx];
  q += table.alpha_ * (r + table.gamma_ * table.max_over(s_next, mask) - q);
  ++table.visits_[idx];
}

ActionId select_action(const QTable& table, StateIndex s, double mu,
                       std::uint64_t t, std::uint64_t horizon,
                       const ActionMask& mask, RngStream& rng) {
  const bool exploring_phase =
      static_cast<double>(t) < 0.6 * static_cast<double>(horizon);
  if (exploring_phase && mu > 0.0 && rng.uniform() < mu) {
    std::uint32_t k = rng.uniform_int(static_cast<std::uint32_t>(mask.count()));
    for (int a = 0; a < kNumActions; ++a) {
      if (!mask.allowed[a]) continue;
      if (k == 0) return static_cast<ActionId>(a);
      --k;
    }
  }

  int ties[kNumActions];
  int n_ties = 0;
  double best = 0.0;
  for (int a = 0; a < kNumActions; ++a) {
    if (!mask.allowed[a]) continue;
    const double v = table.at(s, static_cast<ActionId>(a));
    if (n_ties == 0 || v > best) {
      best = v;
      ties[0] = a;
      n_ties = 1;
    } else if (v == best) {
      ties[n_ties++] = a;
    }
  }
  if (n_ties == 0) throw std::invalid_argument("empty action mask");
  if (n_ties == 1) return static_cast<ActionId>(ties[0]);
  return static_cast<ActionId>(
      ties[rng.uniform_int(static_cast<std::uint32_t>(n_ties))]);
}

Policy greedy_policy(const QTable& table, const ActionMask& mask) {
  Policy pi;
  pi.mask = mask;
  pi.action.resize(table.n_states());
  for (StateIndex s = 0; s < table.n_states(); ++s) {
    int best_a = -1;
    double best = 0.0;
    for (int a = 0; a < kNumActions; ++a) {
      if (!mask.allowed[a]) continue;
      const double v = table.at(s, static_cast<ActionId>(a));
      if (best_a < 0 || v > best) {
        best = v;
        best_a = a;
      }
    }
    if (best_a < 0) throw std::invalid_argument("empty action mask");
    pi.action[s] = static_cast<std::uint8_t>(best_a);
  }
  return pi;
}

void check_valid(const LearnHyper& hyper) {
  if (!(hyper.alpha > 0.0 && hyper.alpha <= 1.0)) {
    throw std::invalid_argument("learning.alpha must lie in (0, 1]");
  }
  if (!(hyper.gamma >= 0.0 && hyper.gamma < 1.0)) {
    throw std::invalid_argument(
        "learning.gamma must lie in [0, 1): the discounted sum diverges at 1");
  }
  if (!(hyper.mu >= 0.0 && hyper.mu <= 1.0)) {
    throw std::invalid_argument("learning.mu must lie in [0, 1]");
  }
  if (hyper.horizon < 1) {
    throw std::invalid_argument("training horizon must be >= 1");
  }
  if (hyper.curve_window < 1) {
    throw std::invalid_argument("curve window must be >= 1");
  }
}

TrainResult train(const ModelParams& mp, const RewardParams& rp,
                  const LevelScheme& scheme, const LearnHyper& hyper,
                  const ActionMask& mask, std::uint64_t seed) {
  check_valid(mp);
  check_valid(rp);
  check_valid(hyper);
  if (mask.count() == 0) throw std::invalid_argument("empty action mask");

  const RngStream root(seed);
  SimStreams env(root.substream("env"));
  RngStream explore = root.substream("explore");

  QTable table(scheme.state_count(), hyper.alpha, hyper.gamma);
  NetworkState state = initial_state(mp, env);
  StateIndex s = encode_state(observables(state), scheme);

  std::vector<CurvePoint> curve;
  double window_sum = 0.0;
  std::uint64_t window_n = 0;

  for (std::uint64_t t = 0; t < hyper.horizon; ++t) {
    const ActionId a =
        select_action(table, s, hyper.mu, t, hyper.horizon, mask, explore);
    const RewardInputs in = reward_inputs(state);
    auto [next, outcome] = step(state, a, mp, env);
    const double r = reward(in, a, outcome.r_s, outcome.r_ps, rp);
    const StateIndex s_next = encode_state(observables(next), scheme);
    q_update(table, s, a, r, s_next, mask);

    window_sum += r;
    if (++window_n == hyper.curve_window || t + 1 == hyper.horizon) {
      curve.push_back({t + 1, window_sum / static_cast<double>(window_n)});
      window_sum = 0.0;
      window_n = 0;
    }

    state = next;
    s = s_next;
  }

  Policy pi = greedy_policy(table, mask);
  return TrainResult{std::move(table), std::move(pi), std::move(curve)};
}

}  // namespace cogrelay
