// Command-line front end: validate a config, train/evaluate a single agent,
// run the full sweep, solve small instances exactly, and plot sweep CSVs.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cogrelay/config.hpp"
#include "cogrelay/experiment.hpp"
#include "cogrelay/io.hpp"
#include "cogrelay/oracle.hpp"
#include "cogrelay/qtable_io.hpp"
#include "cogrelay/svg.hpp"

namespace {

using namespace cogrelay;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;    // bad flags or an invalid config
constexpr int kExitRuntime = 2;  // a command failed while running

struct CommonFlags {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::vector<double>> omegas;
  std::optional<int> grid_points;
  std::optional<int> replications;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool needs_config) {
  auto* config_opt =
      cmd->add_option("--config", flags.config_path, "Config file path");
  if (needs_config) config_opt->required();
  cmd->add_option("--out", flags.out_dir, "Output directory");
  cmd->add_option("--seed", flags.seed, "Override sweep.base_seed");
  cmd->add_option("--mode", flags.mode,
                  "Override sweep.mode (cooperative|non-cooperative|both)");
  cmd->add_option("--omega", flags.omegas,
                  "Override reward.omega (comma separated)")
      ->delimiter(',');
  cmd->add_option("--grid", flags.grid_points, "Override sweep.grid_points");
  cmd->add_option("--reps", flags.replications,
                  "Override sweep.replications");
  cmd->add_flag("--quiet", flags.quiet, "Suppress progress output");
}

// Loads the config and applies flag overrides; prints diagnostics and
// returns nothing if the result is unusable.
std::optional<ExperimentConfig> load_config(const CommonFlags& flags) {
  ConfigLoadResult loaded;
  try {
    loaded = load_experiment_config(flags.config_path);
  } catch (const ConfigParseError& e) {
    std::cerr << flags.config_path << ": " << e.what() << "\n";
    return std::nullopt;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return std::nullopt;
  }
  if (!loaded.diagnostics.empty()) {
    for (const std::string& d : loaded.diagnostics) {
      std::cerr << flags.config_path << ": " << d << "\n";
    }
    return std::nullopt;
  }

  ExperimentConfig cfg = loaded.config;
  if (flags.seed) cfg.base_seed = *flags.seed;
  if (flags.grid_points) cfg.grid.points = *flags.grid_points;
  if (flags.replications) cfg.replications = *flags.replications;
  if (flags.omegas) cfg.omegas = *flags.omegas;
  if (flags.mode) {
    try {
      cfg.mode = parse_mode(*flags.mode);
    } catch (const std::exception& e) {
      std::cerr << e.what() << "\n";
      return std::nullopt;
    }
  }
  try {
    check_valid(cfg);
  } catch (const std::exception& e) {
    std::cerr << "config is not usable after overrides: " << e.what() << "\n";
    return std::nullopt;
  }
  return cfg;
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

// A train or eval run needs one omega and a concrete mode.
bool single_run_params(const ExperimentConfig& cfg, const char* verb,
                       RewardParams& rp, ActionMask& mask) {
  if (cfg.omegas.size() != 1) {
    std::cerr << verb << " needs exactly one omega (use --omega)\n";
    return false;
  }
  if (cfg.mode == Mode::Both) {
    std::cerr << verb
              << " needs a concrete mode: --mode cooperative or "
                 "--mode non-cooperative\n";
    return false;
  }
  rp = RewardParams{cfg.omegas.front(), cfg.penalty_k,
                    cfg.a2_penalty_uses_ps_link};
  mask = mask_for(cfg.mode);
  return true;
}

int cmd_validate(const CommonFlags& flags) {
  if (!load_config(flags)) return kExitUsage;
  std::cout << flags.config_path << ": ok\n";
  return kExitOk;
}

int cmd_train(const CommonFlags& flags) {
  const auto cfg = load_config(flags);
  if (!cfg) return kExitUsage;
  RewardParams rp;
  ActionMask mask;
  if (!single_run_params(*cfg, "train", rp, mask)) return kExitUsage;

  const LevelScheme scheme = scheme_of(*cfg);
  const TrainResult result =
      train(cfg->model, rp, scheme, cfg->hyper, mask, cfg->base_seed);

  const std::string table_path = join_path(flags.out_dir, "qtable.bin");
  save_qtable(table_path, result.table, scheme, mask);
  atomic_write(join_path(flags.out_dir, "learning_curve.csv"),
               learning_curve_csv(result.curve));

  if (!flags.quiet) {
    const double tail =
        result.curve.empty() ? 0.0 : result.curve.back().mean_reward;
    std::cout << "trained " << to_string(cfg->mode) << " agent for "
              << cfg->hyper.horizon << " slots (seed " << cfg->base_seed
              << "); last-window mean reward " << format_g6(tail) << "\n"
              << "wrote " << table_path << "\n";
  }
  return kExitOk;
}

int cmd_eval(const CommonFlags& flags, const std::string& qtable_flag) {
  const auto cfg = load_config(flags);
  if (!cfg) return kExitUsage;
  if (cfg->omegas.size() != 1) {
    std::cerr << "eval needs exactly one omega (use --omega)\n";
    return kExitUsage;
  }
  const std::string table_path = qtable_flag.empty()
                                     ? join_path(flags.out_dir, "qtable.bin")
                                     : qtable_flag;

  const QTableArtifact artifact = load_qtable(table_path);
  const Policy policy = greedy_policy(artifact.table, artifact.mask);
  const RewardParams rp{cfg->omegas.front(), cfg->penalty_k,
                        cfg->a2_penalty_uses_ps_link};
  const MetricsRecord metrics =
      evaluate(policy, artifact.scheme, cfg->model, rp, cfg->eval_horizon,
               cfg->base_seed);

  SweepRow row;
  row.mode = artifact.mask == ActionMask::own_traffic_only()
                 ? Mode::NonCooperative
                 : Mode::Cooperative;
  row.omega = rp.omega;
  row.lambda_p = cfg->model.arrival_p.lambda;
  row.replication = 0;
  row.seed = cfg->base_seed;
  row.metrics = metrics;
  atomic_write(join_path(flags.out_dir, "metrics.csv"), results_csv({row}));

  if (!flags.quiet) {
    std::cout << "evaluated " << table_path << " for " << cfg->eval_horizon
              << " slots: primary " << format_g6(metrics.primary_throughput)
              << ", secondary " << format_g6(metrics.secondary_throughput)
              << ", relayed " << format_g6(metrics.relayed_throughput)
              << ", mean reward " << format_g6(metrics.mean_reward) << "\n";
  }
  return kExitOk;
}

int cmd_sweep(const CommonFlags& flags) {
  const auto cfg = load_config(flags);
  if (!cfg) return kExitUsage;

  if (!flags.quiet) {
    const int n_modes = cfg->mode == Mode::Both ? 2 : 1;
    std::cout << "sweeping " << cfg->grid.points << " grid points x "
              << cfg->omegas.size() << " omega x " << n_modes << " mode x "
              << cfg->replications << " replications\n";
  }
  const SweepResult result = run_sweep(*cfg);

  atomic_write(join_path(flags.out_dir, "results.csv"),
               results_csv(result.rows));
  atomic_write(join_path(flags.out_dir, "sweep_manifest.csv"),
               sweep_manifest_csv(result));

  if (!flags.quiet) {
    std::cout << "wrote " << result.rows.size() << " rows to "
              << join_path(flags.out_dir, "results.csv") << "\n";
  }
  for (const SweepCellError& err : result.errors) {
    std::cerr << "cell failed (mode=" << to_string(err.mode)
              << ", omega=" << format_g6(err.omega)
              << ", lambda_p=" << format_g6(err.lambda_p)
              << ", replication=" << err.replication << "): " << err.message
              << "\n";
  }
  return result.errors.empty() ? kExitOk : kExitRuntime;
}

int cmd_oracle(const CommonFlags& flags) {
  const auto cfg = load_config(flags);
  if (!cfg) return kExitUsage;
  if (cfg->omegas.size() != 1) {
    std::cerr << "oracle needs exactly one omega (use --omega)\n";
    return kExitUsage;
  }

  OracleInstance inst;
  inst.model = cfg->model;
  inst.model.capacity = {cfg->oracle.capacity, cfg->oracle.capacity,
                         cfg->oracle.capacity, cfg->oracle.capacity,
                         cfg->oracle.capacity};
  inst.reward = RewardParams{cfg->omegas.front(), cfg->penalty_k,
                             cfg->a2_penalty_uses_ps_link};
  inst.discount = cfg->hyper.gamma;
  inst.state_ceiling = cfg->oracle.state_ceiling;

  const OracleSolution sol = value_iteration(inst, cfg->oracle.tolerance);
  if (!flags.quiet) {
    std::cout << "value iteration converged after " << sol.sweeps
              << " sweeps (residual " << format_g6(sol.residual) << ")\n";
  }

  const LevelScheme scheme(cfg->oracle.levels, {});
  const TrainResult learned = train(inst.model, inst.reward, scheme,
                                    cfg->hyper, inst.mask, cfg->base_seed);

  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < cfg->oracle.eval_seeds; ++i) {
    seeds.push_back(derive_seed(cfg->base_seed,
                                {0xe7a1u, static_cast<std::uint64_t>(i)}));
  }
  const GapReport report = oracle_gap(learned.policy, scheme, inst, sol,
                                      cfg->oracle.eval_horizon, seeds);

  {
    const FullStateSpace space(inst.model, inst.state_ceiling);
    std::ostringstream vals;
    vals << "state_index,value,action\n";
    for (std::size_t i = 0; i < sol.values.size(); ++i) {
      vals << i << ',' << format_g6(sol.values[i]) << ','
           << static_cast<int>(sol.actions[i]) << '\n';
    }
    atomic_write(join_path(flags.out_dir, "oracle_solution.csv"), vals.str());
  }
  {
    std::ostringstream rep;
    rep << "seed,oracle_mean_reward,learned_mean_reward\n";
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      rep << seeds[i] << ',' << format_g6(report.oracle_per_seed[i]) << ','
          << format_g6(report.learned_per_seed[i]) << '\n';
    }
    rep << "overall," << format_g6(report.oracle_mean_reward) << ','
        << format_g6(report.learned_mean_reward) << '\n';
    atomic_write(join_path(flags.out_dir, "oracle_report.csv"), rep.str());
  }

  if (!flags.quiet) {
    std::cout << "oracle mean reward " << format_g6(report.oracle_mean_reward)
              << ", learned " << format_g6(report.learned_mean_reward)
              << ", relative gap " << format_g6(report.gap) << "\n";
  }
  return kExitOk;
}

struct PlotKey {
  std::string mode;
  double omega;

  bool operator<(const PlotKey& other) const {
    if (mode != other.mode) return mode < other.mode;
    return omega < other.omega;
  }
};

int cmd_plot(const CommonFlags& flags) {
  const std::string results_path = join_path(flags.out_dir, "results.csv");
  const auto rows = parse_csv(read_text_file(results_path));
  if (rows.size() < 2) {
    std::cerr << results_path << ": no data rows\n";
    return kExitRuntime;
  }
  const std::vector<std::string>& header = rows.front();
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* need :
       {"mode", "omega", "lambda_p", "primary_throughput",
        "secondary_throughput"}) {
    if (!col.count(need)) {
      std::cerr << results_path << ": missing column " << need << "\n";
      return kExitRuntime;
    }
  }

  // Average replications per (mode, omega, lambda) and plot against the
  // primary arrival rate 1 - lambda_p.
  struct Acc {
    double primary = 0.0, secondary = 0.0;
    int n = 0;
  };
  std::map<PlotKey, std::map<double, Acc>> groups;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const PlotKey key{row[col["mode"]], std::stod(row[col["omega"]])};
    Acc& acc = groups[key][std::stod(row[col["lambda_p"]])];
    acc.primary += std::stod(row[col["primary_throughput"]]);
    acc.secondary += std::stod(row[col["secondary_throughput"]]);
    acc.n += 1;
  }

  const auto build = [&](bool primary) {
    ChartSpec spec;
    spec.title = primary ? "Delivered primary packets per slot"
                         : "Secondary packets per slot";
    spec.x_label = "primary arrival rate (1 - lambda_p)";
    spec.y_label = primary ? "primary throughput" : "secondary throughput";
    for (const auto& [key, points] : groups) {
      ChartSeries series;
      series.label = key.mode + ", omega=" + format_g6(key.omega);
      series.dashed = key.mode == "non-cooperative";
      for (const auto& [lambda, acc] : points) {
        series.points.emplace_back(
            1.0 - lambda,
            (primary ? acc.primary : acc.secondary) / acc.n);
      }
      std::sort(series.points.begin(), series.points.end());
      spec.series.push_back(std::move(series));
    }
    return spec;
  };

  atomic_write(join_path(flags.out_dir, "primary_throughput.svg"),
               render_line_chart(build(true)));
  atomic_write(join_path(flags.out_dir, "secondary_throughput.svg"),
               render_line_chart(build(false)));
  if (!flags.quiet) {
    std::cout << "wrote primary_throughput.svg and secondary_throughput.svg "
                 "to "
              << flags.out_dir << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Slotted-time cognitive relaying simulator with a Q-learning secondary "
      "user"};
  app.require_subcommand(1);

  CommonFlags validate_flags, train_flags, eval_flags, sweep_flags,
      oracle_flags, plot_flags;
  std::string qtable_flag;

  auto* validate_cmd =
      app.add_subcommand("validate", "Check a config file and exit");
  add_common(validate_cmd, validate_flags, true);

  auto* train_cmd =
      app.add_subcommand("train", "Train one agent and save its Q-table");
  add_common(train_cmd, train_flags, true);

  auto* eval_cmd =
      app.add_subcommand("eval", "Evaluate a saved Q-table greedily");
  add_common(eval_cmd, eval_flags, true);
  eval_cmd->add_option("--qtable", qtable_flag,
                       "Q-table artifact (default <out>/qtable.bin)");

  auto* sweep_cmd = app.add_subcommand(
      "sweep", "Train and evaluate over the full parameter grid");
  add_common(sweep_cmd, sweep_flags, true);

  auto* oracle_cmd = app.add_subcommand(
      "oracle", "Solve the shrunk instance exactly and report the gap");
  add_common(oracle_cmd, oracle_flags, true);

  auto* plot_cmd =
      app.add_subcommand("plot", "Render SVG charts from <out>/results.csv");
  add_common(plot_cmd, plot_flags, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (validate_cmd->parsed()) return cmd_validate(validate_flags);
    if (train_cmd->parsed()) return cmd_train(train_flags);
    if (eval_cmd->parsed()) return cmd_eval(eval_flags, qtable_flag);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_flags);
    if (oracle_cmd->parsed()) return cmd_oracle(oracle_flags);
    if (plot_cmd->parsed()) return cmd_plot(plot_flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
