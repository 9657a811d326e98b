#pragma once

#include "tgode/snapshot.hpp"
#include "tgode/sparse.hpp"
#include "tgode/tape.hpp"
#include "tgode/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace tgode {

/// Single-hidden-layer perceptron: y = act(x w1 + b1) w2 + b2.
struct MlpWeights {
  Matrix w1;  // in x hidden
  Matrix b1;  // 1 x hidden
  Matrix w2;  // hidden x out
  Matrix b2;  // 1 x out
};

/// Learnable state of the predictor: one weight matrix per neighbourhood
/// hop, optional encoder/readout, integration step, activation, and the
/// combination rule applied at interval boundaries.
struct TgodeParams {
  std::vector<Matrix> theta;  // hops+1 matrices, (h + d_z) x h
  std::optional<MlpWeights> encoder;
  std::optional<MlpWeights> readout;
  Scalar eps = 1e-3;
  Activation activation = Activation::Tanh;
  PsiMode psi_mode = PsiMode::Replace;

  int hops() const { return static_cast<int>(theta.size()) - 1; }
  bool has_mlp() const { return encoder.has_value(); }
  std::int64_t parameter_count() const;
};

/// Canonical flat views over the trainable matrices; order is fixed:
/// theta_0..theta_K, encoder (w1, b1, w2, b2), readout (w1, b1, w2, b2).
std::vector<Matrix*> parameter_list(TgodeParams& p);
std::vector<const Matrix*> parameter_list(const TgodeParams& p);

struct ModelShape {
  Index state_dim = 1;
  Index exo_dim = 0;
  int hops = 5;
  std::optional<Index> embedding;  // no encoder/readout when absent
  Scalar eps = 1e-3;
  Activation activation = Activation::Tanh;
  PsiMode psi_mode = PsiMode::Replace;
};

/// Allocates parameter matrices for a shape and fills them uniformly in
/// [-1/sqrt(fan_in), 1/sqrt(fan_in)), in the canonical parameter order.
TgodeParams make_params(const ModelShape& shape, std::uint64_t seed);

/// Structural validation; throws ConfigError. d_x/d_z are the data dims.
void validate_params(const TgodeParams& p, Index d_x, Index d_z);

/// Smallest positive step count m with eps*m >= dt, robust to
/// floating-point noise when dt is an exact multiple of eps.
std::int64_t steps_for_interval(Scalar dt, Scalar eps);

struct IntervalPlan {
  Scalar dt = 0.0;
  Scalar eps = 0.0;
  std::int64_t n_steps = 0;
};

IntervalPlan plan_interval(Scalar t_prev, Scalar t_next, Scalar eps);

/// Combination of observed state and previous prediction that seeds each
/// interval. For the first interval the prediction argument is a zero
/// matrix of the observed shape.
Matrix psi_combine(const Eigen::Ref<const Matrix>& observed,
                   const Eigen::Ref<const Matrix>& predicted, PsiMode mode);

/// K-hop Euler recursion on the tape:
///   X^{l+1} = X^l + eps * act(sum_k (L^k applied iteratively) X^l theta_k),
/// with optional exogenous columns concatenated before the products.
/// Throws NumericOverflowError when a state stops being finite.
DiffValue euler_rollout(Tape& tape, DiffValue x0_latent,
                        const SparseMatrix& laplacian,
                        const std::vector<DiffValue>& theta,
                        std::optional<DiffValue> exo, Activation act,
                        const IntervalPlan& plan);

/// Tape-recorded pass over a whole sequence.
struct SequenceRun {
  std::vector<DiffValue> predictions;  // predictions at t_1..t_T
  DiffValue loss;                      // mean over snapshots of per-snapshot MAE
  std::vector<DiffValue> param_leaves; // canonical order, trainable
};

SequenceRun run_sequence(Tape& tape, const TgodeParams& params,
                         const SparseMatrix& laplacian,
                         const SnapshotSequence& seq, bool trainable);

/// Tape-free forward pass; same arithmetic as run_sequence.
std::vector<Matrix> predict_sequence(const TgodeParams& params,
                                     const SparseMatrix& laplacian,
                                     const SnapshotSequence& seq);

/// Mean over snapshots i=1..T of the per-snapshot mean absolute error of
/// predict_sequence against the observations.
Scalar sequence_mae(const TgodeParams& params, const SparseMatrix& laplacian,
                    const SnapshotSequence& seq);

}  // namespace tgode
