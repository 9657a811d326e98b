#pragma once

#include "tgode/graph.hpp"
#include "tgode/rng.hpp"
#include "tgode/snapshot.hpp"
#include "tgode/sparse.hpp"
#include "tgode/types.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace tgode {

/// The seven synthetic diffusion vector fields.
enum class DiffusionKind {
  Lap,       // -L X
  Lap2,      // -L^2 X
  Lap5,      // -L^5 X
  TanhLap,   // -tanh(L) X, tanh applied entrywise to L
  LapX5,     // -5 L X
  LapX005,   // -0.05 L X
  LapNoise,  // -(L + N) X, N a fixed n x n standard-normal matrix
};

std::string to_string(DiffusionKind k);
std::optional<DiffusionKind> diffusion_from_string(const std::string& s);

struct DiffusionSpec {
  DiffusionKind kind = DiffusionKind::Lap;
  std::uint64_t noise_seed = 0;  // used only by LapNoise
};

/// Vector field F(X) for one DiffusionSpec, materialized once.
/// The noise matrix of LapNoise is sampled at construction and frozen.
class DiffusionOperator {
 public:
  DiffusionOperator(const DiffusionSpec& spec, const SparseMatrix& laplacian);

  Index n_nodes() const { return n_; }
  /// F(X); X is n_nodes x d.
  Matrix apply(const Eigen::Ref<const Matrix>& x) const;

 private:
  Index n_ = 0;
  bool dense_ = false;
  SparseMatrix sparse_op_;  // includes the sign and any scalar factor
  Matrix dense_op_;
};

/// Dense node-state trajectory on the simulation lattice t = step * eps.
struct Trajectory {
  std::vector<Scalar> timestamps;
  std::vector<Matrix> states;
};

enum class SpikeMode { SingleSpike, MultiSpike };

std::string to_string(SpikeMode m);
std::optional<SpikeMode> spike_mode_from_string(const std::string& s);

/// Base temperatures ~ U[0, 0.2); SingleSpike overwrites one node with a hot
/// value ~ U[10, 15); MultiSpike overwrites floor(n/3) distinct nodes, each
/// cold ~ U[-15, -10) with probability 0.4, else hot.
Vector init_temperatures(Index n, SpikeMode mode, std::uint64_t seed);

/// Forward Euler: X_{s+1} = X_s + eps * F(X_s), n_steps times.
/// Throws NumericOverflowError if any state entry becomes non-finite.
Trajectory simulate(const DiffusionOperator& op,
                    const Eigen::Ref<const Matrix>& x0, std::int64_t n_steps,
                    Scalar eps);

/// `count` distinct indices chosen uniformly without replacement, sorted;
/// index 0 is always included so the initial state is observable.
SnapshotSequence subsample_irregular(const Trajectory& traj,
                                     std::int64_t count, std::uint64_t seed,
                                     std::shared_ptr<const Graph> graph);

struct HeatDatasetConfig {
  SpikeMode mode = SpikeMode::SingleSpike;
  DiffusionSpec spec;
  Index rows = 7;
  Index cols = 10;
  Scalar eps = 1e-3;
  std::int64_t train_steps = 1000;
  std::int64_t train_count = 100;
  std::int64_t eval_steps = 500;
  std::int64_t eval_count = 50;
  std::uint64_t train_seed = 0;
  std::uint64_t val_seed = 0;
  std::uint64_t test_seed = 0;
};

struct HeatDataset {
  std::shared_ptr<const Graph> graph;
  SnapshotSequence train;
  SnapshotSequence val;
  SnapshotSequence test;
};

/// Train from one simulation, val and test from two fresh simulations with
/// their own initial conditions. Fully determined by the config.
HeatDataset make_heat_dataset(const HeatDatasetConfig& config);

}  // namespace tgode
