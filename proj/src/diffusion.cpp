#include "tgode/diffusion.hpp"

#include "tgode/errors.hpp"

#include <cmath>
#include <utility>

namespace tgode {

std::string to_string(DiffusionKind k) {
  switch (k) {
    case DiffusionKind::Lap: return "l";
    case DiffusionKind::Lap2: return "l2";
    case DiffusionKind::Lap5: return "l5";
    case DiffusionKind::TanhLap: return "tanh_l";
    case DiffusionKind::LapX5: return "l_x5";
    case DiffusionKind::LapX005: return "l_x005";
    case DiffusionKind::LapNoise: return "l_noise";
  }
  return "?";
}

std::optional<DiffusionKind> diffusion_from_string(const std::string& s) {
  if (s == "l") return DiffusionKind::Lap;
  if (s == "l2") return DiffusionKind::Lap2;
  if (s == "l5") return DiffusionKind::Lap5;
  if (s == "tanh_l") return DiffusionKind::TanhLap;
  if (s == "l_x5") return DiffusionKind::LapX5;
  if (s == "l_x005") return DiffusionKind::LapX005;
  if (s == "l_noise") return DiffusionKind::LapNoise;
  return std::nullopt;
}

std::string to_string(SpikeMode m) {
  return m == SpikeMode::SingleSpike ? "single" : "multi";
}

std::optional<SpikeMode> spike_mode_from_string(const std::string& s) {
  if (s == "single") return SpikeMode::SingleSpike;
  if (s == "multi") return SpikeMode::MultiSpike;
  return std::nullopt;
}

DiffusionOperator::DiffusionOperator(const DiffusionSpec& spec,
                                     const SparseMatrix& laplacian) {
  if (laplacian.rows() != laplacian.cols())
    throw ShapeMismatchError("diffusion operator: laplacian not square");
  n_ = laplacian.rows();
  switch (spec.kind) {
    case DiffusionKind::Lap:
      sparse_op_ = laplacian.scaled(-1.0);
      break;
    case DiffusionKind::Lap2:
      sparse_op_ = matmul(laplacian, laplacian).scaled(-1.0);
      break;
    case DiffusionKind::Lap5: {
      const auto powers = operator_powers(laplacian, 5);
      sparse_op_ = powers[5].scaled(-1.0);
      break;
    }
    case DiffusionKind::TanhLap:
      // tanh(0) = 0, so mapping stored values is the entrywise tanh of the
      // dense form.
      sparse_op_ =
          laplacian.unary_map([](Scalar v) { return std::tanh(v); }).scaled(
              -1.0);
      break;
    case DiffusionKind::LapX5:
      sparse_op_ = laplacian.scaled(-5.0);
      break;
    case DiffusionKind::LapX005:
      sparse_op_ = laplacian.scaled(-0.05);
      break;
    case DiffusionKind::LapNoise: {
      dense_ = true;
      Rng rng(spec.noise_seed);
      Matrix noise(n_, n_);
      for (Index r = 0; r < n_; ++r)
        for (Index c = 0; c < n_; ++c) noise(r, c) = rng.normal();
      dense_op_ = -(laplacian.to_dense() + noise);
      break;
    }
  }
}

Matrix DiffusionOperator::apply(const Eigen::Ref<const Matrix>& x) const {
  if (x.rows() != n_)
    throw ShapeMismatchError("diffusion operator: state has wrong row count");
  if (dense_) return dense_op_ * x;
  return spmm(sparse_op_, x);
}

Vector init_temperatures(Index n, SpikeMode mode, std::uint64_t seed) {
  if (n < 1) throw InvalidValueError("init_temperatures: n must be >= 1");
  Rng rng(seed);
  Vector x(n);
  for (Index i = 0; i < n; ++i) x[i] = rng.uniform(0.0, 0.2);
  if (mode == SpikeMode::SingleSpike) {
    const Index node = static_cast<Index>(rng.uniform_int(n));
    x[node] = rng.uniform(10.0, 15.0);
  } else {
    const auto nodes = rng.sample_distinct(n, n / 3);
    for (const std::int64_t node : nodes) {
      const bool cold = rng.uniform() < 0.4;
      x[static_cast<Index>(node)] =
          cold ? rng.uniform(-15.0, -10.0) : rng.uniform(10.0, 15.0);
    }
  }
  return x;
}

Trajectory simulate(const DiffusionOperator& op,
                    const Eigen::Ref<const Matrix>& x0, std::int64_t n_steps,
                    Scalar eps) {
  if (eps <= 0.0) throw InvalidValueError("simulate: eps must be positive");
  if (n_steps < 1) throw InvalidValueError("simulate: n_steps must be >= 1");
  Trajectory traj;
  traj.timestamps.reserve(static_cast<std::size_t>(n_steps) + 1);
  traj.states.reserve(static_cast<std::size_t>(n_steps) + 1);
  Matrix x = x0;
  traj.timestamps.push_back(0.0);
  traj.states.push_back(x);
  for (std::int64_t s = 1; s <= n_steps; ++s) {
    x += eps * op.apply(x);
    if (!x.allFinite())
      throw NumericOverflowError("simulate: non-finite state at step " +
                                 std::to_string(s));
    traj.timestamps.push_back(eps * static_cast<Scalar>(s));
    traj.states.push_back(x);
  }
  return traj;
}

SnapshotSequence subsample_irregular(const Trajectory& traj,
                                     std::int64_t count, std::uint64_t seed,
                                     std::shared_ptr<const Graph> graph) {
  const std::int64_t len = static_cast<std::int64_t>(traj.timestamps.size());
  if (count < 1)
    throw InvalidValueError("subsample_irregular: count must be >= 1");
  if (count > len)
    throw CountTooLargeError("subsample_irregular: count " +
                             std::to_string(count) + " > trajectory length " +
                             std::to_string(len));
  Rng rng(seed);
  std::vector<std::int64_t> indices;
  indices.push_back(0);
  if (count > 1) {
    auto rest = rng.sample_distinct(len - 1, count - 1);
    for (std::int64_t r : rest) indices.push_back(r + 1);
  }
  std::sort(indices.begin(), indices.end());
  std::vector<Snapshot> entries;
  entries.reserve(indices.size());
  for (std::int64_t i : indices) {
    const auto u = static_cast<std::size_t>(i);
    entries.push_back(Snapshot{traj.timestamps[u], traj.states[u], std::nullopt});
  }
  return SnapshotSequence(std::move(entries), std::move(graph));
}

HeatDataset make_heat_dataset(const HeatDatasetConfig& config) {
  if (config.train_seed == config.val_seed ||
      config.train_seed == config.test_seed ||
      config.val_seed == config.test_seed)
    throw InvalidValueError(
        "make_heat_dataset: train/val/test simulation seeds must be distinct");
  auto graph = std::make_shared<const Graph>(
      build_grid_graph(config.rows, config.cols));
  const SparseMatrix laplacian = normalized_laplacian(*graph);
  const DiffusionOperator op(config.spec, laplacian);
  const Index n = graph->n_nodes();

  auto split = [&](std::uint64_t seed, std::int64_t steps,
                   std::int64_t count) {
    const Vector x0 =
        init_temperatures(n, config.mode, Rng::derive(seed, 0));
    const Trajectory traj = simulate(op, x0, steps, config.eps);
    return subsample_irregular(traj, count, Rng::derive(seed, 1), graph);
  };

  HeatDataset ds;
  ds.graph = graph;
  ds.train = split(config.train_seed, config.train_steps, config.train_count);
  ds.val = split(config.val_seed, config.eval_steps, config.eval_count);
  ds.test = split(config.test_seed, config.eval_steps, config.eval_count);
  return ds;
}

}  // namespace tgode
