#pragma once

#include "tgode/diffusion.hpp"
#include "tgode/io.hpp"
#include "tgode/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tgode::cli {

struct SimulateOptions {
  DiffusionKind diffusion = DiffusionKind::Lap;
  SpikeMode mode = SpikeMode::SingleSpike;
  Index rows = 7;
  Index cols = 10;
  std::uint64_t seed = 1;
  Scalar sim_eps = 1e-3;
  std::int64_t train_steps = 1000;
  std::int64_t train_count = 100;
  std::int64_t eval_steps = 500;
  std::int64_t eval_count = 50;
  std::string out;
};

/// Writes train/val/test snapshot files, the edge list, and a manifest.
void run_simulate(const SimulateOptions& opts);

/// Builds (heat) or loads (external) the dataset a RunConfig describes.
HeatDataset load_dataset(const RunConfig& cfg);

struct TrainCliOptions {
  std::string config_path;
  std::string out_override;
};

/// Trains the single configuration of a singleton grid.
void run_train(const TrainCliOptions& opts);

struct GridSearchOptions {
  std::string config_path;
  int workers_override = -1;  // <0: use the config's value
  std::string out_override;
};

void run_grid_search(const GridSearchOptions& opts);

struct EvaluateOptions {
  std::string checkpoint;
  std::string data_dir;    // directory produced by `simulate`
  std::string snapshots;   // alternative: explicit files
  std::string edges;
  std::string split = "test";
  std::string out;
};

void run_evaluate(const EvaluateOptions& opts);

struct AblateOptions {
  std::string config_path;
  std::vector<std::int64_t> counts;
  int repeats = 1;
  std::string out_override;
};

/// For each snapshot count: random selection, 80/10/10 temporal split,
/// fresh grid search; one CSV row per (count, repeat).
void run_ablate(const AblateOptions& opts);

struct BaselineOptions {
  std::string kind;  // "lb" or "node"
  std::string data_dir;
  std::string split = "test";
  std::string config_path;  // optional; node training hyperparameters
  std::string out;
};

void run_baseline(const BaselineOptions& opts);

/// Parses argv, dispatches, maps errors to exit codes
/// (0 ok, 2 validation, 3 io, 4 numeric).
int run_main(int argc, char** argv);

}  // namespace tgode::cli
