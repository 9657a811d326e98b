#pragma once

#include "tgode/diffusion.hpp"
#include "tgode/graph.hpp"
#include "tgode/model.hpp"
#include "tgode/snapshot.hpp"
#include "tgode/train.hpp"
#include "tgode/types.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>

namespace tgode {

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(Scalar v);

/// Edge-list text: one "u v" pair per line, 0-indexed, whitespace separated;
/// columns after the second are edge attributes; '#' starts a comment.
void write_edge_list(const std::filesystem::path& path, const Graph& g);
Graph read_edge_list(const std::filesystem::path& path);

/// Snapshot file: JSON lines, one object per snapshot:
///   {"t": <float>, "x": [[...], ...], "z": [[...], ...]?}
/// Timestamps must strictly increase; all states share one shape.
void write_snapshot_file(const std::filesystem::path& path,
                         const SnapshotSequence& seq);
SnapshotSequence read_snapshot_file(const std::filesystem::path& path,
                                    std::shared_ptr<const Graph> graph);

/// Versioned JSON checkpoint; load(save(p)) reproduces every weight bit.
void save_checkpoint(const std::filesystem::path& path, const TgodeParams& p);
TgodeParams load_checkpoint(const std::filesystem::path& path);

enum class TaskKind { HeatSingle, HeatMulti, External };

std::string to_string(TaskKind t);

/// One experiment description: task, data source, hyperparameter grid,
/// execution knobs. Parsed from `key = value` text; unknown keys are hard
/// errors.
struct RunConfig {
  TaskKind task = TaskKind::HeatSingle;
  DiffusionKind diffusion = DiffusionKind::Lap;
  Index rows = 7;
  Index cols = 10;
  std::uint64_t data_seed = 1;
  TrialGrid grid;  // grid.base_seed doubles as the trial seed root
  int workers = 1;
  std::string out = "runs/out";
  // external task inputs
  std::string train_snapshots;
  std::string val_snapshots;
  std::string test_snapshots;
  std::string edges;
};

RunConfig read_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(std::istream& in, const std::string& origin);

/// Stable results-CSV column set, one row per trial.
std::string results_csv_header();
std::string results_csv_row(const TrialResult& r);

}  // namespace tgode
