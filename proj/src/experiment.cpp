#include "cogrelay/experiment.hpp"

#include <atomic>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "cogrelay/io.hpp"

namespace cogrelay {

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Cooperative:
      return "cooperative";
    case Mode::NonCooperative:
      return "non-cooperative";
    case Mode::Both:
      return "both";
  }
  throw std::logic_error("unreachable mode");
}

Mode parse_mode(const std::string& text) {
  if (text == "cooperative") return Mode::Cooperative;
  if (text == "non-cooperative") return Mode::NonCooperative;
  if (text == "both") return Mode::Both;
  throw std::invalid_argument(
      "mode must be cooperative, non-cooperative or both (got '" + text +
      "')");
}

std::vector<double> lambda_grid(const SweepGrid& grid) {
  if (grid.points < 1) throw std::invalid_argument("grid needs >= 1 point");
  if (grid.lambda_min < 0.0 || grid.lambda_max > 1.0 ||
      grid.lambda_min > grid.lambda_max) {
    throw std::invalid_argument("lambda grid must satisfy 0 <= min <= max <= 1");
  }
  std::vector<double> xs;
  xs.reserve(grid.points);
  if (grid.points == 1) {
    xs.push_back(grid.lambda_min);
    return xs;
  }
  const double step =
      (grid.lambda_max - grid.lambda_min) / (grid.points - 1);
  for (int i = 0; i < grid.points; ++i) {
    xs.push_back(grid.lambda_min + step * i);
  }
  return xs;
}

LevelScheme scheme_of(const ExperimentConfig& cfg) {
  return LevelScheme(cfg.n_levels, cfg.thresholds);
}

void check_valid(const ExperimentConfig& cfg) {
  check_valid(cfg.model);
  if (cfg.omegas.empty()) {
    throw std::invalid_argument("at least one omega is required");
  }
  for (double w : cfg.omegas) {
    check_valid(RewardParams{w, cfg.penalty_k, cfg.a2_penalty_uses_ps_link});
  }
  const LevelScheme scheme = scheme_of(cfg);  // validates levels/thresholds
  if (!scheme.thresholds().empty()) {
    const int top = scheme.thresholds().back();
    if (top >= cfg.model.capacity.s || top >= cfg.model.capacity.ps ||
        top >= cfg.model.capacity.se) {
      throw std::invalid_argument(
          "largest quantizer threshold must be below the quantized queue "
          "capacities");
    }
  }
  check_valid(cfg.hyper);
  lambda_grid(cfg.grid);  // validates the grid
  if (cfg.replications < 1) {
    throw std::invalid_argument("replications must be >= 1");
  }
  if (cfg.eval_horizon < 1) {
    throw std::invalid_argument("eval horizon must be >= 1");
  }
  if (cfg.oracle.capacity < 1) {
    throw std::invalid_argument("oracle capacity must be >= 1");
  }
  if (cfg.oracle.levels < 2) {
    throw std::invalid_argument("oracle levels must be >= 2");
  }
  if (!(cfg.oracle.tolerance > 0.0)) {
    throw std::invalid_argument("oracle tolerance must be > 0");
  }
  if (cfg.oracle.eval_horizon < 1 || cfg.oracle.eval_seeds < 1) {
    throw std::invalid_argument("oracle evaluation needs >= 1 seed and slot");
  }
}

MetricsRecord evaluate_fn(const PolicyFn& decide, const ModelParams& mp,
                          const RewardParams& rp, std::uint64_t horizon,
                          std::uint64_t seed) {
  if (horizon < 1) throw std::invalid_argument("eval horizon must be >= 1");

  const RngStream root(seed);
  SimStreams env(root.substream("eval"));
  NetworkState state = initial_state(mp, env);

  std::uint64_t delivered = 0, own = 0, relayed = 0, wasted = 0, collided = 0;
  std::uint64_t q_p_sum = 0, q_pe_sum = 0, q_s_sum = 0, q_ps_sum = 0,
                q_se_sum = 0;
  MetricsRecord m;
  double reward_sum = 0.0;

  for (std::uint64_t t = 0; t < horizon; ++t) {
    q_p_sum += state.q_p.len;
    q_pe_sum += state.q_pe.len;
    q_s_sum += state.q_s.len;
    q_ps_sum += state.q_ps.len;
    q_se_sum += state.q_se.len;

    const ActionId a = decide(state);
    const RewardInputs in = reward_inputs(state);
    auto [next, out] = step(state, a, mp, env);
    reward_sum += reward(in, a, out.r_s, out.r_ps, rp);

    delivered += out.direct_delivery + out.relayed_delivery;
    own += out.r_s;
    relayed += out.r_ps;
    wasted += out.energy_wasted;
    collided += out.collision;
    m.drops_p += out.drop_p;
    m.drops_pe += out.drop_pe;
    m.drops_s += out.drop_s;
    m.drops_ps += out.drop_ps;
    m.drops_se += out.drop_se;

    state = next;
  }

  const double h = static_cast<double>(horizon);
  m.primary_throughput = delivered / h;
  m.secondary_throughput = own / h;
  m.relayed_throughput = relayed / h;
  m.mean_q_p = q_p_sum / h;
  m.mean_q_pe = q_pe_sum / h;
  m.mean_q_s = q_s_sum / h;
  m.mean_q_ps = q_ps_sum / h;
  m.mean_q_se = q_se_sum / h;
  m.energy_wasted_rate = wasted / h;
  m.collision_rate = collided / h;
  m.mean_reward = reward_sum / h;
  return m;
}

MetricsRecord evaluate(const Policy& policy, const LevelScheme& scheme,
                       const ModelParams& mp, const RewardParams& rp,
                       std::uint64_t horizon, std::uint64_t seed) {
  if (policy.action.size() != scheme.state_count()) {
    throw std::invalid_argument("policy does not cover the state space");
  }
  return evaluate_fn(
      [&](const NetworkState& st) {
        return policy.at(encode_state(observables(st), scheme));
      },
      mp, rp, horizon, seed);
}

MetricsRecord evaluate(const Policy& policy, const ExperimentConfig& cfg,
                       std::uint64_t seed) {
  if (cfg.omegas.size() != 1) {
    throw std::invalid_argument(
        "single-run evaluation needs exactly one omega");
  }
  const RewardParams rp{cfg.omegas.front(), cfg.penalty_k,
                        cfg.a2_penalty_uses_ps_link};
  return evaluate(policy, scheme_of(cfg), cfg.model, rp, cfg.eval_horizon,
                  seed);
}

std::uint64_t cell_seed(std::uint64_t base_seed, int lambda_idx,
                        int omega_idx, Mode mode, int replication) {
  if (mode == Mode::Both) throw std::invalid_argument("cell mode must be concrete");
  return derive_seed(base_seed,
                     {static_cast<std::uint64_t>(lambda_idx),
                      static_cast<std::uint64_t>(omega_idx),
                      static_cast<std::uint64_t>(mode == Mode::NonCooperative),
                      static_cast<std::uint64_t>(replication)});
}

namespace {

struct CellSpec {
  int lambda_idx = 0;
  int omega_idx = 0;
  Mode mode = Mode::Cooperative;
  int replication = 0;
  double lambda_p = 0.0;
  double omega = 0.0;
};

unsigned resolve_threads(unsigned requested, std::size_t n_cells) {
  unsigned n = requested;
  if (n == 0) {
    if (const char* env = std::getenv("COGRELAY_THREADS")) {
      const long v = std::strtol(env, nullptr, 10);
      if (v > 0) n = static_cast<unsigned>(v);
    }
  }
  if (n == 0) n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (n > n_cells) n = static_cast<unsigned>(n_cells);
  return n;
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& cfg, unsigned max_threads) {
  check_valid(cfg);
  const LevelScheme scheme = scheme_of(cfg);
  const std::vector<double> lambdas = lambda_grid(cfg.grid);
  const std::vector<Mode> modes =
      cfg.mode == Mode::Both
          ? std::vector<Mode>{Mode::Cooperative, Mode::NonCooperative}
          : std::vector<Mode>{cfg.mode};

  std::vector<CellSpec> cells;
  for (int li = 0; li < static_cast<int>(lambdas.size()); ++li) {
    for (int oi = 0; oi < static_cast<int>(cfg.omegas.size()); ++oi) {
      for (Mode mode : modes) {
        for (int rep = 0; rep < cfg.replications; ++rep) {
          cells.push_back({li, oi, mode, rep, lambdas[li], cfg.omegas[oi]});
        }
      }
    }
  }

  std::vector<SweepRow> rows(cells.size());
  std::vector<std::string> failures(cells.size());
  std::vector<char> failed(cells.size(), 0);

  auto run_cell = [&](std::size_t i) {
    const CellSpec& c = cells[i];
    SweepRow& row = rows[i];
    row.mode = c.mode;
    row.omega = c.omega;
    row.lambda_p = c.lambda_p;
    row.replication = c.replication;
    row.seed = cell_seed(cfg.base_seed, c.lambda_idx, c.omega_idx, c.mode,
                         c.replication);
    try {
      ModelParams mp = cfg.model;
      mp.arrival_p = MmbpParams{c.lambda_p, c.lambda_p};  // beta_p = lambda_p
      const RewardParams rp{c.omega, cfg.penalty_k,
                            cfg.a2_penalty_uses_ps_link};
      const TrainResult tr =
          train(mp, rp, scheme, cfg.hyper, mask_for(c.mode), row.seed);
      row.metrics = evaluate(tr.policy, scheme, mp, rp, cfg.eval_horizon,
                             row.seed);
    } catch (const std::exception& e) {
      failed[i] = 1;
      failures[i] = e.what();
    }
  };

  const unsigned n_threads = resolve_threads(max_threads, cells.size());
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned w = 0; w < n_threads; ++w) {
      pool.emplace_back([&] {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= cells.size()) return;
          run_cell(i);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  SweepResult result;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (failed[i]) {
      result.errors.push_back({cells[i].mode, cells[i].omega,
                               cells[i].lambda_p, cells[i].replication,
                               failures[i]});
    } else {
      result.rows.push_back(rows[i]);
    }
  }
  return result;
}

namespace {

void append_row(std::ostringstream& out, const SweepRow& row) {
  const MetricsRecord& m = row.metrics;
  out << to_string(row.mode) << ',' << format_g6(row.omega) << ','
      << format_g6(row.lambda_p) << ',' << row.replication << ',' << row.seed
      << ',' << format_g6(m.primary_throughput) << ','
      << format_g6(m.secondary_throughput) << ','
      << format_g6(m.relayed_throughput) << ',' << format_g6(m.mean_q_p)
      << ',' << format_g6(m.mean_q_pe) << ',' << format_g6(m.mean_q_s) << ','
      << format_g6(m.mean_q_ps) << ',' << format_g6(m.mean_q_se) << ','
      << m.drops_p << ',' << m.drops_s << ',' << m.drops_ps << ','
      << format_g6(m.energy_wasted_rate) << ','
      << format_g6(m.collision_rate) << ',' << format_g6(m.mean_reward)
      << '\n';
}

}  // namespace

std::string results_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "mode,omega,lambda_p,replication,seed,primary_throughput,"
         "secondary_throughput,relayed_throughput,mean_q_p,mean_q_pe,"
         "mean_q_s,mean_q_ps,mean_q_se,drops_p,drops_s,drops_ps,"
         "energy_wasted_rate,collision_rate,mean_reward\n";
  for (const SweepRow& row : rows) append_row(out, row);
  return out.str();
}

std::string sweep_manifest_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "mode,omega,lambda_p,replication,status,message\n";
  for (const SweepRow& row : result.rows) {
    out << to_string(row.mode) << ',' << format_g6(row.omega) << ','
        << format_g6(row.lambda_p) << ',' << row.replication << ",ok,\n";
  }
  for (const SweepCellError& err : result.errors) {
    std::string msg = err.message;
    for (char& ch : msg) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    out << to_string(err.mode) << ',' << format_g6(err.omega) << ','
        << format_g6(err.lambda_p) << ',' << err.replication << ",failed,"
        << msg << '\n';
  }
  return out.str();
}

std::string learning_curve_csv(const std::vector<CurvePoint>& curve) {
  std::ostringstream out;
  out << "slot,window_mean_reward\n";
  for (const CurvePoint& p : curve) {
    out << p.slot_end << ',' << format_g6(p.mean_reward) << '\n';
  }
  return out.str();
}

}  // namespace cogrelay
