#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cogrelay/experiment.hpp"
#include "cogrelay/oracle.hpp"

using namespace cogrelay;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.grid = {0.1, 0.9, 3};
  cfg.omegas = {0.5};
  cfg.replications = 2;
  cfg.hyper.horizon = 2000;
  cfg.eval_horizon = 2000;
  return cfg;
}

OracleInstance tiny_instance() {
  OracleInstance inst;
  inst.model.capacity = {1, 1, 1, 1, 1};
  inst.model.arrival_p = {0.5, 0.5};
  inst.model.arrival_pe = {0.4, 0.4};
  inst.model.arrival_s = {0.4, 0.4};
  inst.model.arrival_se = {0.8, 0.4};
  inst.model.channel_p = {0.2, 0.4};
  inst.model.channel_s = {0.6, 0.1};
  inst.model.channel_ps = {0.7, 0.2};
  inst.model.channel_sp = {0.8, 0.05};
  inst.reward.omega = 0.5;
  inst.reward.penalty_k = 10.0;
  return inst;
}

double brute_backup(const OracleInstance& inst, const FullStateSpace& space,
                    std::size_t idx, ActionId a,
                    const std::vector<double>& values) {
  const NetworkState st = space.state(idx);
  const RewardInputs in = reward_inputs(st);
  const SlotOutcome out = service_indicators(st, a, inst.model);
  double q = reward(in, a, out.r_s, out.r_ps, inst.reward);
  for (const auto& [j, p] : transition_row(inst, idx, a)) {
    q += inst.discount * p * values[j];
  }
  return q;
}

}  // namespace

TEST_CASE("modes parse and print consistently") {
  CHECK(to_string(Mode::Cooperative) == "cooperative");
  CHECK(to_string(Mode::NonCooperative) == "non-cooperative");
  CHECK(to_string(Mode::Both) == "both");
  CHECK(parse_mode("cooperative") == Mode::Cooperative);
  CHECK(parse_mode("non-cooperative") == Mode::NonCooperative);
  CHECK(parse_mode("both") == Mode::Both);
  CHECK_THROWS_AS(parse_mode("competitive"), std::invalid_argument);
  CHECK(mask_for(Mode::NonCooperative) == ActionMask::own_traffic_only());
  CHECK(mask_for(Mode::Cooperative) == ActionMask::all());
}

TEST_CASE("the lambda grid is an inclusive linspace") {
  const std::vector<double> g = lambda_grid({0.1, 0.9, 9});
  REQUIRE(g.size() == 9);
  for (int i = 0; i < 9; ++i) {
    CHECK(g[i] == doctest::Approx(0.1 + 0.1 * i).epsilon(1e-12));
  }
  const std::vector<double> single = lambda_grid({0.3, 0.3, 1});
  REQUIRE(single.size() == 1);
  CHECK(single[0] == 0.3);
  CHECK_THROWS_AS(lambda_grid({0.9, 0.1, 5}), std::invalid_argument);
  CHECK_THROWS_AS(lambda_grid({0.1, 0.9, 0}), std::invalid_argument);
  CHECK_THROWS_AS(lambda_grid({-0.1, 0.9, 3}), std::invalid_argument);
}

TEST_CASE("cell seeds are deterministic and collision free") {
  const ExperimentConfig cfg;
  std::set<std::uint64_t> seen;
  for (int li = 0; li < 9; ++li) {
    for (int oi = 0; oi < 3; ++oi) {
      for (Mode mode : {Mode::Cooperative, Mode::NonCooperative}) {
        for (int rep = 0; rep < 5; ++rep) {
          const std::uint64_t s = cell_seed(cfg.base_seed, li, oi, mode, rep);
          CHECK(s == cell_seed(cfg.base_seed, li, oi, mode, rep));
          seen.insert(s);
        }
      }
    }
  }
  CHECK(seen.size() == 9u * 3u * 2u * 5u);
  CHECK(cell_seed(1, 0, 0, Mode::Cooperative, 0) !=
        cell_seed(2, 0, 0, Mode::Cooperative, 0));
  CHECK_THROWS_AS(cell_seed(1, 0, 0, Mode::Both, 0), std::invalid_argument);
}

TEST_CASE("an idle secondary in an empty network produces zero metrics") {
  ExperimentConfig cfg;
  cfg.model.arrival_p = {1.0, 1.0};  // primary never sends
  const PolicyFn idle = [](const NetworkState&) { return ActionId::Idle; };
  const MetricsRecord m =
      evaluate_fn(idle, cfg.model, RewardParams{}, 100000, 7);
  CHECK(m.primary_throughput == 0.0);
  CHECK(m.secondary_throughput == 0.0);
  CHECK(m.relayed_throughput == 0.0);
  CHECK(m.collision_rate == 0.0);
  CHECK(m.energy_wasted_rate == 0.0);
  CHECK(m.mean_reward == 0.0);
  CHECK(m.mean_q_p == 0.0);
  // Untended queues still fill from their own arrivals.
  CHECK(m.mean_q_s > 10.0);
  CHECK(m.drops_s > 0);
}

TEST_CASE("a policy without relay actions never relays") {
  ExperimentConfig cfg;
  const PolicyFn own = [](const NetworkState& st) {
    return (st.q_s.len > 0 && st.q_se.len > 0) ? ActionId::TransmitOwn
                                               : ActionId::Idle;
  };
  const MetricsRecord m =
      evaluate_fn(own, cfg.model, RewardParams{}, 50000, 11);
  CHECK(m.relayed_throughput == 0.0);
  CHECK(m.mean_q_ps == 0.0);
  CHECK(m.drops_ps == 0);
  CHECK(m.secondary_throughput > 0.05);
}

TEST_CASE("secondary throughput saturates at the energy arrival rate") {
  ModelParams mp;
  mp.capacity = {20, 20, 20, 20, 20};
  mp.arrival_p = {1.0, 1.0};   // no primary traffic
  mp.arrival_pe = {0.4, 0.4};
  mp.arrival_s = {0.0, 0.0};   // a data packet every slot
  mp.arrival_se = {0.8, 0.4};  // stationary rate 1/3
  for (ChannelParams* ch : {&mp.channel_p, &mp.channel_s, &mp.channel_ps,
                            &mp.channel_sp}) {
    *ch = {1.0, 0.0};  // always connected
  }
  const PolicyFn greedy = [](const NetworkState& st) {
    return (st.q_s.len > 0 && st.q_se.len > 0) ? ActionId::TransmitOwn
                                               : ActionId::Idle;
  };
  const MetricsRecord m = evaluate_fn(greedy, mp, RewardParams{}, 200000, 13);
  CHECK(m.secondary_throughput == doctest::Approx(1.0 / 3.0).epsilon(0.03));
  CHECK(m.collision_rate == 0.0);
  CHECK(m.energy_wasted_rate == 0.0);
}

TEST_CASE("policy evaluation matches its functional form exactly") {
  ExperimentConfig cfg;
  const LevelScheme scheme = scheme_of(cfg);
  LearnHyper hyper;
  hyper.horizon = 5000;
  const TrainResult tr = train(cfg.model, RewardParams{}, scheme, hyper,
                               ActionMask::all(), 21);
  const MetricsRecord a =
      evaluate(tr.policy, scheme, cfg.model, RewardParams{}, 20000, 31);
  const PolicyFn lifted = [&](const NetworkState& st) {
    return tr.policy.at(encode_state(observables(st), scheme));
  };
  const MetricsRecord b =
      evaluate_fn(lifted, cfg.model, RewardParams{}, 20000, 31);
  CHECK(a.primary_throughput == b.primary_throughput);
  CHECK(a.secondary_throughput == b.secondary_throughput);
  CHECK(a.mean_q_se == b.mean_q_se);
  CHECK(a.mean_reward == b.mean_reward);
  CHECK(a.drops_p == b.drops_p);
}

TEST_CASE("sweeps enumerate the grid in canonical order") {
  const ExperimentConfig cfg = small_config();
  const SweepResult res = run_sweep(cfg, 1);
  CHECK(res.errors.empty());
  REQUIRE(res.rows.size() == 3u * 1u * 2u * 2u);

  std::size_t i = 0;
  for (double lambda : {0.1, 0.5, 0.9}) {
    for (Mode mode : {Mode::Cooperative, Mode::NonCooperative}) {
      for (int rep = 0; rep < 2; ++rep) {
        const SweepRow& row = res.rows[i++];
        CHECK(row.lambda_p == doctest::Approx(lambda).epsilon(1e-12));
        CHECK(row.mode == mode);
        CHECK(row.omega == 0.5);
        CHECK(row.replication == rep);
        CHECK(std::isfinite(row.metrics.mean_reward));
        if (mode == Mode::NonCooperative) {
          CHECK(row.metrics.relayed_throughput == 0.0);
          CHECK(row.metrics.mean_q_ps == 0.0);
        }
      }
    }
  }
}

TEST_CASE("sweeps are reproducible and thread-count invariant") {
  const ExperimentConfig cfg = small_config();
  const SweepResult serial = run_sweep(cfg, 1);
  const SweepResult again = run_sweep(cfg, 1);
  const SweepResult threaded = run_sweep(cfg, 3);
  CHECK(results_csv(serial.rows) == results_csv(again.rows));
  CHECK(results_csv(serial.rows) == results_csv(threaded.rows));
}

TEST_CASE("a silent primary yields exactly zero primary throughput") {
  ExperimentConfig cfg = small_config();
  cfg.grid = {1.0, 1.0, 1};
  const SweepResult res = run_sweep(cfg, 0);
  CHECK(res.errors.empty());
  REQUIRE(res.rows.size() == 4);
  for (const SweepRow& row : res.rows) {
    CHECK(row.metrics.primary_throughput == 0.0);
    CHECK(row.metrics.mean_q_p == 0.0);
    CHECK(row.metrics.drops_p == 0);
  }
}

TEST_CASE("the results table round-trips one row verbatim") {
  SweepRow row;
  row.mode = Mode::Cooperative;
  row.omega = 0.5;
  row.lambda_p = 0.1;
  row.replication = 2;
  row.seed = 42;
  row.metrics.primary_throughput = 0.25;
  row.metrics.secondary_throughput = 1.0 / 3.0;
  row.metrics.relayed_throughput = 0.125;
  row.metrics.mean_q_p = 1.5;
  row.metrics.mean_q_pe = 2.5;
  row.metrics.mean_q_s = 3.5;
  row.metrics.mean_q_ps = 4.5;
  row.metrics.mean_q_se = 5.5;
  row.metrics.drops_p = 7;
  row.metrics.drops_s = 8;
  row.metrics.drops_ps = 9;
  row.metrics.energy_wasted_rate = 0.01;
  row.metrics.collision_rate = 0.02;
  row.metrics.mean_reward = -1.25;

  const std::string expected =
      "mode,omega,lambda_p,replication,seed,primary_throughput,"
      "secondary_throughput,relayed_throughput,mean_q_p,mean_q_pe,"
      "mean_q_s,mean_q_ps,mean_q_se,drops_p,drops_s,drops_ps,"
      "energy_wasted_rate,collision_rate,mean_reward\n"
      "cooperative,0.5,0.1,2,42,0.25,0.333333,0.125,1.5,2.5,3.5,4.5,5.5,"
      "7,8,9,0.01,0.02,-1.25\n";
  CHECK(results_csv({row}) == expected);
}

TEST_CASE("the sweep manifest reports failures without breaking the format") {
  SweepResult res;
  SweepRow ok;
  ok.mode = Mode::Cooperative;
  ok.omega = 0.5;
  ok.lambda_p = 0.2;
  ok.replication = 0;
  res.rows.push_back(ok);

  SweepCellError err;
  err.mode = Mode::NonCooperative;
  err.omega = 0.8;
  err.lambda_p = 0.4;
  err.replication = 3;
  err.message = "bad thing,\nwith separators";
  res.errors.push_back(err);

  const std::string manifest = sweep_manifest_csv(res);
  CHECK(manifest ==
        "mode,omega,lambda_p,replication,status,message\n"
        "cooperative,0.5,0.2,0,ok,\n"
        "non-cooperative,0.8,0.4,3,failed,bad thing;;with separators\n");
}

TEST_CASE("the learning curve table has one row per window") {
  const std::vector<CurvePoint> curve{{1000, 0.125}, {2000, -0.5}};
  CHECK(learning_curve_csv(curve) ==
        "slot,window_mean_reward\n"
        "1000,0.125\n"
        "2000,-0.5\n");
}

TEST_CASE("the full state space indexes itself consistently") {
  const OracleInstance inst = tiny_instance();
  const FullStateSpace space(inst.model, inst.state_ceiling);
  CHECK(space.size() == 32u * 16u * 16u);
  for (std::size_t idx = 0; idx < space.size(); idx += 7) {
    const NetworkState st = space.state(idx);
    CHECK(space.index(st) == idx);
  }

  ModelParams big = inst.model;
  big.capacity = {20, 20, 20, 20, 20};
  try {
    FullStateSpace oversized(big, 1000000);
    FAIL("the oversized space should have been rejected");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("reduce the queue capacities") !=
          std::string::npos);
  }
}

TEST_CASE("transition rows are proper distributions") {
  const OracleInstance inst = tiny_instance();
  const FullStateSpace space(inst.model, inst.state_ceiling);
  for (std::size_t idx = 0; idx < space.size(); idx += 97) {
    for (int a = 0; a < kNumActions; ++a) {
      double total = 0.0;
      for (const auto& [j, p] : transition_row(inst, idx,
                                               static_cast<ActionId>(a))) {
        CHECK(p >= 0.0);
        CHECK(j < space.size());
        total += p;
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("a zero-discount solution is the myopic reward maximum") {
  OracleInstance inst = tiny_instance();
  inst.discount = 0.0;
  const OracleSolution sol = value_iteration(inst, 1e-12);
  const FullStateSpace space(inst.model, inst.state_ceiling);
  for (std::size_t idx = 0; idx < space.size(); ++idx) {
    const NetworkState st = space.state(idx);
    const RewardInputs in = reward_inputs(st);
    double best = -1e100;
    for (int a = 0; a < kNumActions; ++a) {
      const SlotOutcome out =
          service_indicators(st, static_cast<ActionId>(a), inst.model);
      best = std::max(best, reward(in, static_cast<ActionId>(a), out.r_s,
                                   out.r_ps, inst.reward));
    }
    REQUIRE(sol.values[idx] == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("dying channels and a free penalty collapse to the myopic value") {
  OracleInstance inst = tiny_instance();
  for (ChannelParams* ch : {&inst.model.channel_p, &inst.model.channel_s,
                            &inst.model.channel_ps, &inst.model.channel_sp}) {
    *ch = {0.0, 1.0};  // drops after one slot and never reconnects
  }
  inst.reward.penalty_k = 0.0;
  const OracleSolution sol = value_iteration(inst, 1e-12);
  const FullStateSpace space(inst.model, inst.state_ceiling);
  for (std::size_t idx = 0; idx < space.size(); ++idx) {
    const NetworkState st = space.state(idx);
    const RewardInputs in = reward_inputs(st);
    double best = -1e100;
    for (int a = 0; a < kNumActions; ++a) {
      const SlotOutcome out =
          service_indicators(st, static_cast<ActionId>(a), inst.model);
      best = std::max(best, reward(in, static_cast<ActionId>(a), out.r_s,
                                   out.r_ps, inst.reward));
    }
    REQUIRE(sol.values[idx] == doctest::Approx(best).epsilon(1e-12));
    if (!st.ch_p.connected && !st.ch_s.connected && !st.ch_ps.connected &&
        !st.ch_sp.connected) {
      REQUIRE(sol.values[idx] == doctest::Approx(0.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("value iteration improves monotonically from its pessimistic start") {
  const OracleInstance inst = tiny_instance();
  const OracleSolution sol = value_iteration(inst, 1e-9);
  CHECK(sol.min_sweep_increment >= -1e-9);
  CHECK(sol.residual < 1e-9);
  CHECK(sol.sweeps > 10);
  // All values live inside the discounted reward bounds.
  const double lo = -30.0 / (1.0 - inst.discount);
  const double hi = 0.5 / (1.0 - inst.discount);
  for (double v : sol.values) {
    REQUIRE(v >= lo);
    REQUIRE(v <= hi);
  }
}

TEST_CASE("the factored solver agrees with explicit transition rows") {
  const OracleInstance inst = tiny_instance();
  const OracleSolution sol = value_iteration(inst, 1e-13);
  const FullStateSpace space(inst.model, inst.state_ceiling);
  for (std::size_t idx = 0; idx < space.size(); idx += 23) {
    double best = -1e100;
    for (int a = 0; a < kNumActions; ++a) {
      best = std::max(best, brute_backup(inst, space, idx,
                                         static_cast<ActionId>(a),
                                         sol.values));
    }
    REQUIRE(sol.values[idx] == doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("stored greedy actions maximize the explicit backup") {
  const OracleInstance inst = tiny_instance();
  const OracleSolution sol = value_iteration(inst, 1e-13);
  const FullStateSpace space(inst.model, inst.state_ceiling);
  for (std::size_t idx = 0; idx < space.size(); idx += 11) {
    double q[kNumActions];
    double best = -1e100;
    for (int a = 0; a < kNumActions; ++a) {
      q[a] = brute_backup(inst, space, idx, static_cast<ActionId>(a),
                          sol.values);
      best = std::max(best, q[a]);
    }
    const int stored = sol.actions[idx];
    REQUIRE(q[stored] >= best - 1e-9);
    // Away from numerical ties the stored action is the unique argmax.
    int strictly_better = 0;
    for (int a = 0; a < stored; ++a) {
      if (q[a] > q[stored] + 1e-9) ++strictly_better;
    }
    REQUIRE(strictly_better == 0);
  }
}

TEST_CASE("the exact policy transmits in a degenerate always-on world") {
  OracleInstance inst = tiny_instance();
  for (ChannelParams* ch : {&inst.model.channel_p, &inst.model.channel_s,
                            &inst.model.channel_ps, &inst.model.channel_sp}) {
    *ch = {1.0, 0.0};  // always connected
  }
  inst.model.arrival_p = {1.0, 1.0};   // no primary packets
  inst.model.arrival_s = {0.0, 0.0};   // SU data every slot
  inst.model.arrival_se = {0.0, 0.0};  // SU energy every slot

  const OracleSolution sol = value_iteration(inst, 1e-10);
  const FullStateSpace space(inst.model, inst.state_ceiling);
  int states_checked = 0;
  for (std::size_t idx = 0; idx < space.size(); ++idx) {
    const NetworkState st = space.state(idx);
    if (st.q_s.len < 1 || st.q_se.len < 1) continue;
    if (st.q_p.len != 0 || st.q_ps.len != 0) continue;
    if (!(st.ch_p.connected && st.ch_s.connected && st.ch_ps.connected &&
          st.ch_sp.connected)) {
      continue;
    }
    CHECK(sol.actions[idx] == static_cast<int>(ActionId::TransmitOwn));
    ++states_checked;
  }
  CHECK(states_checked == 32);

  // The learner should find the same rule at the quantized level.
  LearnHyper hyper;
  hyper.horizon = 50000;
  RewardParams rp = inst.reward;
  const TrainResult tr = train(inst.model, rp, LevelScheme(2, {}), hyper,
                               ActionMask::all(), 404);
  Observation obs;
  obs.pu_active = 0;
  obs.ch_p = obs.ch_s = obs.ch_ps = obs.ch_sp = 1;
  obs.q_s_len = 1;
  obs.q_se_len = 1;
  obs.q_ps_len = 0;
  const StateIndex busy = encode_state(obs, LevelScheme(2, {}));
  CHECK(tr.policy.at(busy) == ActionId::TransmitOwn);
}

TEST_CASE("a learned policy lands near the exact optimum on a small instance") {
  OracleInstance inst = tiny_instance();
  const OracleSolution sol = value_iteration(inst, 1e-9);

  LearnHyper hyper;
  hyper.horizon = 150000;
  const LevelScheme scheme(2, {});
  const TrainResult tr = train(inst.model, inst.reward, scheme, hyper,
                               ActionMask::all(), 1717);

  const std::vector<std::uint64_t> seeds{901, 902};
  const GapReport gap = oracle_gap(tr.policy, scheme, inst, sol, 50000, seeds);
  REQUIRE(gap.oracle_per_seed.size() == 2);
  REQUIRE(gap.learned_per_seed.size() == 2);
  CHECK(std::isfinite(gap.gap));
  CHECK(std::abs(gap.gap) < 0.15);
  // The exact policy cannot lose to its own quantized approximation by much.
  CHECK(gap.oracle_mean_reward >
        gap.learned_mean_reward - 0.1 * std::abs(gap.learned_mean_reward) -
            0.01);
}
