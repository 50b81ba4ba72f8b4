#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cogrelay/rl.hpp"
#include "cogrelay/simcore.hpp"

namespace cogrelay {

enum class Mode { Cooperative, NonCooperative, Both };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);  // throws on unknown text

inline ActionMask mask_for(Mode mode) {
  return mode == Mode::NonCooperative ? ActionMask::own_traffic_only()
                                      : ActionMask::all();
}

struct SweepGrid {
  double lambda_min = 0.1;
  double lambda_max = 0.9;
  int points = 9;
};

std::vector<double> lambda_grid(const SweepGrid& grid);

// Settings for the exact-solver command on a shrunk instance.
struct OracleConfig {
  int capacity = 2;  // applied to all five queues
  int levels = 2;
  double tolerance = 1e-9;
  std::size_t state_ceiling = 1000000;
  std::uint64_t eval_horizon = 1000000;
  int eval_seeds = 3;
};

/**
 * Everything a study run needs. Defaults reproduce the reference setup:
 * size-20 buffers, the four link parameter pairs, the three fixed arrival
 * processes, K=10, N=4 with thresholds {6,12}, alpha=0.5, gamma=0.9,
 * mu=0.05. The primary arrival pair (lambda_p = beta_p) is the swept knob.
 */
struct ExperimentConfig {
  ModelParams model;
  double penalty_k = 10.0;
  std::vector<double> omegas{0.5};
  bool a2_penalty_uses_ps_link = false;
  int n_levels = 4;
  std::vector<int> thresholds{6, 12};
  LearnHyper hyper;
  SweepGrid grid;
  int replications = 5;
  Mode mode = Mode::Both;
  std::uint64_t eval_horizon = 100000;
  std::uint64_t base_seed = 20250816;
  OracleConfig oracle;

  ExperimentConfig() {
    model.arrival_p = {0.5, 0.5};
    model.arrival_pe = {0.4, 0.4};
    model.arrival_s = {0.4, 0.4};
    model.arrival_se = {0.8, 0.4};
    model.channel_p = {0.2, 0.4};
    model.channel_s = {0.6, 0.1};
    model.channel_ps = {0.7, 0.2};
    model.channel_sp = {0.8, 0.05};
  }
};

LevelScheme scheme_of(const ExperimentConfig& cfg);
void check_valid(const ExperimentConfig& cfg);

struct MetricsRecord {
  // Delivered primary packets per slot, direct decodes plus relayed.
  double primary_throughput = 0.0;
  double secondary_throughput = 0.0;  // mean r_s per slot
  double relayed_throughput = 0.0;    // mean r_ps per slot
  double mean_q_p = 0.0, mean_q_pe = 0.0, mean_q_s = 0.0, mean_q_ps = 0.0,
         mean_q_se = 0.0;
  std::uint64_t drops_p = 0, drops_pe = 0, drops_s = 0, drops_ps = 0,
                drops_se = 0;
  double energy_wasted_rate = 0.0;
  double collision_rate = 0.0;
  double mean_reward = 0.0;
};

using PolicyFn = std::function<ActionId(const NetworkState&)>;

// Long-run metrics of a fixed decision rule: no exploration, no learning.
// Queue means are over slot-start lengths.
MetricsRecord evaluate_fn(const PolicyFn& decide, const ModelParams& mp,
                          const RewardParams& rp, std::uint64_t horizon,
                          std::uint64_t seed);

MetricsRecord evaluate(const Policy& policy, const LevelScheme& scheme,
                       const ModelParams& mp, const RewardParams& rp,
                       std::uint64_t horizon, std::uint64_t seed);

// Convenience form over a single-omega config; the config's arrival_p is
// used as-is.
MetricsRecord evaluate(const Policy& policy, const ExperimentConfig& cfg,
                       std::uint64_t seed);

std::uint64_t cell_seed(std::uint64_t base_seed, int lambda_idx,
                        int omega_idx, Mode mode, int replication);

struct SweepRow {
  Mode mode = Mode::Cooperative;  // concrete mode, never Both
  double omega = 0.0;
  double lambda_p = 0.0;
  int replication = 0;
  std::uint64_t seed = 0;
  MetricsRecord metrics;
};

struct SweepCellError {
  Mode mode = Mode::Cooperative;
  double omega = 0.0;
  double lambda_p = 0.0;
  int replication = 0;
  std::string message;
};

struct SweepResult {
  std::vector<SweepRow> rows;         // successful cells, canonical order
  std::vector<SweepCellError> errors; // failed cells, canonical order
};

/**
 * Train-then-evaluate over the full (lambda_p x omega x mode x replication)
 * grid. Cells run independently (up to max_threads workers; 0 means the
 * COGRELAY_THREADS env var, else hardware concurrency) and are assembled in
 * a fixed order, so the result is identical regardless of parallelism. A
 * failing cell is reported with its coordinates; the rest still run.
 */
SweepResult run_sweep(const ExperimentConfig& cfg, unsigned max_threads = 0);

// CSV with the canonical header; floats at 6 significant digits.
std::string results_csv(const std::vector<SweepRow>& rows);

// One line per attempted cell: ok rows and failed rows with messages.
std::string sweep_manifest_csv(const SweepResult& result);

std::string learning_curve_csv(const std::vector<CurvePoint>& curve);

}  // namespace cogrelay
