#pragma once

#include "tgode/model.hpp"
#include "tgode/optim.hpp"
#include "tgode/snapshot.hpp"
#include "tgode/sparse.hpp"
#include "tgode/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace tgode {

struct Metrics {
  Scalar mae = 0.0;
  Scalar log10_mae = 0.0;  // -inf when mae == 0
};

/// mae = mean |pred - target|, log10_mae = log10(mae).
Metrics metrics(const Eigen::Ref<const Matrix>& pred,
                const Eigen::Ref<const Matrix>& target);

/// Mean over snapshots of the per-snapshot MAE between predictions and the
/// observations at t_1..t_T.
Metrics sequence_metrics(const std::vector<Matrix>& predictions,
                         const SnapshotSequence& seq);

/// Persistence predictor: the prediction for t_{i+1} is the observation at
/// t_i.
Metrics lb_baseline(const SnapshotSequence& seq);

/// NODE-style rollout with no node interactions: requires hops == 0 and
/// integrates each node state independently of the graph.
std::vector<Matrix> node_predict(const TgodeParams& params,
                                 const SnapshotSequence& seq);

/// One hyperparameter assignment.
struct TrialConfig {
  Scalar lr = 1e-3;
  Scalar weight_decay = 1e-3;
  PsiMode psi_mode = PsiMode::Replace;
  Activation activation = Activation::Tanh;
  std::optional<Index> embedding;
  Scalar eps = 1e-3;
  int hops = 5;
  std::int64_t max_epochs = 3000;
  std::int64_t patience = 100;
  std::uint64_t seed = 1;
};

struct TrialResult {
  TrialConfig config;
  std::size_t config_index = 0;
  bool diverged = false;
  Scalar best_val_mae = 0.0;
  Scalar test_mae = 0.0;
  Scalar test_log10_mae = 0.0;
  std::int64_t epochs_run = 0;
  Scalar wall_time_s = 0.0;
  std::int64_t parameter_count = 0;
  TgodeParams best_params;  // checkpoint with the best validation MAE
};

/// Full-batch training with early stopping on validation MAE. Test metrics
/// come from the best-validation checkpoint. A numeric overflow marks the
/// trial as diverged instead of propagating. When `initial_params` is given
/// it replaces the seeded initialization (shapes must match the config).
TrialResult train(const TrialConfig& config, const SparseMatrix& laplacian,
                  const SnapshotSequence& train_seq,
                  const SnapshotSequence& val_seq,
                  const SnapshotSequence& test_seq,
                  const TgodeParams* initial_params = nullptr);

/// Cartesian hyperparameter grid in the order lr, weight_decay, psi,
/// activation, embedding, eps, hops. Combinations of psi=concat with no
/// embedding are skipped.
struct TrialGrid {
  std::vector<Scalar> lr{1e-2, 1e-3, 1e-4};
  std::vector<Scalar> weight_decay{1e-2, 1e-3};
  std::vector<PsiMode> psi{PsiMode::Concat, PsiMode::Sum, PsiMode::Replace};
  std::vector<Activation> activation{Activation::Tanh, Activation::Relu,
                                     Activation::Identity};
  std::vector<std::optional<Index>> embedding{std::nullopt, Index(8)};
  std::vector<Scalar> eps{1e-3};
  std::vector<int> hops{5};
  std::int64_t max_epochs = 3000;
  std::int64_t patience = 100;
  std::uint64_t base_seed = 1;
};

std::vector<TrialConfig> expand_grid(const TrialGrid& grid);

struct GridSearchResult {
  std::vector<TrialResult> trials;    // in config order
  std::size_t best_index = 0;         // into trials
};

/// Runs every trial, ranks by best validation MAE (diverged trials rank
/// last); ties break on fewer parameters, then lower config index.
/// `on_trial_done` is called in config order as results are sealed.
GridSearchResult grid_search(
    const std::vector<TrialConfig>& configs, const SparseMatrix& laplacian,
    const SnapshotSequence& train_seq, const SnapshotSequence& val_seq,
    const SnapshotSequence& test_seq, int workers,
    const std::function<void(const TrialResult&)>& on_trial_done = nullptr);

}  // namespace tgode
