#include "tgode/train.hpp"

#include "tgode/errors.hpp"
#include "tgode/rng.hpp"
#include "tgode/tape.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

namespace tgode {

Metrics metrics(const Eigen::Ref<const Matrix>& pred,
                const Eigen::Ref<const Matrix>& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw ShapeMismatchError("metrics: shape mismatch");
  Metrics m;
  m.mae = (pred - target).array().abs().mean();
  m.log10_mae = log10_mae(m.mae);
  return m;
}

Metrics sequence_metrics(const std::vector<Matrix>& predictions,
                         const SnapshotSequence& seq) {
  if (predictions.size() + 1 != seq.size())
    throw ShapeMismatchError(
        "sequence_metrics: prediction count != snapshot count - 1");
  Scalar total = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i].rows() != seq[i + 1].x.rows() ||
        predictions[i].cols() != seq[i + 1].x.cols())
      throw ShapeMismatchError("sequence_metrics: shape mismatch");
    total += (predictions[i] - seq[i + 1].x).array().abs().mean();
  }
  Metrics m;
  m.mae = total / static_cast<Scalar>(predictions.size());
  m.log10_mae = log10_mae(m.mae);
  return m;
}

Metrics lb_baseline(const SnapshotSequence& seq) {
  if (seq.size() < 2)
    throw InvalidValueError("lb_baseline: need at least 2 snapshots");
  std::vector<Matrix> preds;
  preds.reserve(seq.size() - 1);
  for (std::size_t i = 1; i < seq.size(); ++i) preds.push_back(seq[i - 1].x);
  return sequence_metrics(preds, seq);
}

namespace {

Matrix plain_activation(Activation f, const Matrix& x) {
  switch (f) {
    case Activation::Tanh: return x.array().tanh().matrix();
    case Activation::Relu: return x.cwiseMax(0.0);
    case Activation::Identity: return x;
  }
  return x;
}

Matrix plain_mlp(const MlpWeights& w, const Matrix& x, Activation act) {
  const Matrix ones = Matrix::Ones(x.rows(), 1);
  Matrix a;
  a.noalias() = x * w.w1;
  Matrix b;
  b.noalias() = ones * w.b1;
  Matrix h = plain_activation(act, Matrix(a + b));
  Matrix c;
  c.noalias() = h * w.w2;
  Matrix d;
  d.noalias() = ones * w.b2;
  return c + d;
}

}  // namespace

std::vector<Matrix> node_predict(const TgodeParams& params,
                                 const SnapshotSequence& seq) {
  if (params.hops() != 0)
    throw InvalidValueError("node_predict: requires hops == 0");
  if (seq.size() < 2)
    throw InvalidValueError("node_predict: need at least 2 snapshots");
  validate_params(params, seq.state_dim(), seq.exo_dim());

  std::vector<Matrix> predictions;
  predictions.reserve(seq.size() - 1);
  Matrix prev_pred;
  for (std::size_t i = 1; i < seq.size(); ++i) {
    const Snapshot& prev = seq[i - 1];
    const Snapshot& cur = seq[i];
    const Matrix pred_in = prev_pred.size() > 0
                               ? prev_pred
                               : Matrix::Zero(prev.x.rows(), prev.x.cols());
    Matrix state = params.psi_mode == PsiMode::Replace
                       ? prev.x
                       : psi_combine(prev.x, pred_in, params.psi_mode);
    if (params.encoder)
      state = plain_mlp(*params.encoder, state, params.activation);

    const IntervalPlan plan = plan_interval(prev.t, cur.t, params.eps);
    const bool has_z = prev.z.has_value();
    for (std::int64_t s = 0; s < plan.n_steps; ++s) {
      Matrix u;
      if (has_z) {
        u.resize(state.rows(), state.cols() + prev.z->cols());
        u.leftCols(state.cols()) = state;
        u.rightCols(prev.z->cols()) = *prev.z;
      } else {
        u = state;
      }
      Matrix acc;
      acc.noalias() = u * params.theta[0];
      const Matrix active = plain_activation(params.activation, acc);
      const Matrix scaled = plan.eps * active;
      state = state + scaled;
      if (!state.allFinite())
        throw NumericOverflowError("node_predict: non-finite state");
    }
    Matrix pred =
        params.readout ? plain_mlp(*params.readout, state, params.activation)
                       : state;
    prev_pred = pred;
    predictions.push_back(std::move(pred));
  }
  return predictions;
}

TrialResult train(const TrialConfig& config, const SparseMatrix& laplacian,
                  const SnapshotSequence& train_seq,
                  const SnapshotSequence& val_seq,
                  const SnapshotSequence& test_seq,
                  const TgodeParams* initial_params) {
  const auto t0 = std::chrono::steady_clock::now();

  ModelShape shape;
  shape.state_dim = train_seq.state_dim();
  shape.exo_dim = train_seq.exo_dim();
  shape.hops = config.hops;
  shape.embedding = config.embedding;
  shape.eps = config.eps;
  shape.activation = config.activation;
  shape.psi_mode = config.psi_mode;

  TgodeParams params =
      initial_params ? *initial_params : make_params(shape, config.seed);
  if (initial_params)
    validate_params(params, shape.state_dim, shape.exo_dim);
  auto plist = parameter_list(params);
  AdamState adam = AdamState::zeros_like(plist);
  AdamConfig adam_config;
  adam_config.lr = config.lr;
  adam_config.weight_decay = config.weight_decay;

  TrialResult result;
  result.config = config;
  result.parameter_count = params.parameter_count();

  Scalar best_val = std::numeric_limits<Scalar>::infinity();
  TgodeParams best_params;
  std::int64_t epochs_since_best = 0;

  Tape tape;
  try {
    for (std::int64_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
      result.epochs_run = epoch;
      tape.reset();
      const SequenceRun run =
          run_sequence(tape, params, laplacian, train_seq, true);
      auto grad_map = tape.backward(run.loss);
      std::vector<Matrix> grads;
      grads.reserve(run.param_leaves.size());
      for (const DiffValue& leaf : run.param_leaves)
        grads.push_back(std::move(grad_map.at(leaf.id)));
      adam_step(plist, grads, adam, adam_config);

      const Scalar val_mae = sequence_mae(params, laplacian, val_seq);
      if (val_mae < best_val) {
        best_val = val_mae;
        best_params = params;
        epochs_since_best = 0;
      } else {
        ++epochs_since_best;
      }
      if (epochs_since_best >= config.patience) break;
    }
    result.best_val_mae = best_val;
    const Scalar test_mae = sequence_mae(best_params, laplacian, test_seq);
    result.test_mae = test_mae;
    result.test_log10_mae = log10_mae(test_mae);
    result.best_params = std::move(best_params);
  } catch (const NumericOverflowError&) {
    result.diverged = true;
    result.best_val_mae = std::numeric_limits<Scalar>::quiet_NaN();
    result.test_mae = std::numeric_limits<Scalar>::quiet_NaN();
    result.test_log10_mae = std::numeric_limits<Scalar>::quiet_NaN();
  }

  result.wall_time_s =
      std::chrono::duration<Scalar>(std::chrono::steady_clock::now() - t0)
          .count();
  return result;
}

std::vector<TrialConfig> expand_grid(const TrialGrid& grid) {
  if (grid.lr.empty() || grid.weight_decay.empty() || grid.psi.empty() ||
      grid.activation.empty() || grid.embedding.empty() || grid.eps.empty() ||
      grid.hops.empty())
    throw InvalidValueError("expand_grid: empty grid dimension");
  std::vector<TrialConfig> configs;
  for (const Scalar lr : grid.lr)
    for (const Scalar wd : grid.weight_decay)
      for (const PsiMode psi : grid.psi)
        for (const Activation act : grid.activation)
          for (const auto& emb : grid.embedding) {
            if (psi == PsiMode::Concat && !emb) continue;
            for (const Scalar eps : grid.eps)
              for (const int hops : grid.hops) {
                TrialConfig c;
                c.lr = lr;
                c.weight_decay = wd;
                c.psi_mode = psi;
                c.activation = act;
                c.embedding = emb;
                c.eps = eps;
                c.hops = hops;
                c.max_epochs = grid.max_epochs;
                c.patience = grid.patience;
                c.seed = Rng::derive(grid.base_seed, configs.size());
                configs.push_back(c);
              }
          }
  return configs;
}

namespace {

bool trial_better(const TrialResult& a, const TrialResult& b) {
  if (a.diverged != b.diverged) return !a.diverged;
  if (a.diverged) return a.config_index < b.config_index;
  if (a.best_val_mae != b.best_val_mae) return a.best_val_mae < b.best_val_mae;
  if (a.parameter_count != b.parameter_count)
    return a.parameter_count < b.parameter_count;
  return a.config_index < b.config_index;
}

}  // namespace

GridSearchResult grid_search(
    const std::vector<TrialConfig>& configs, const SparseMatrix& laplacian,
    const SnapshotSequence& train_seq, const SnapshotSequence& val_seq,
    const SnapshotSequence& test_seq, int workers,
    const std::function<void(const TrialResult&)>& on_trial_done) {
  if (configs.empty()) throw InvalidValueError("grid_search: empty grid");

  const std::size_t n = configs.size();
  std::vector<TrialResult> results(n);
  std::vector<bool> done(n, false);
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t flush_cursor = 0;

  auto worker_loop = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      TrialResult r = train(configs[i], laplacian, train_seq, val_seq,
                            test_seq);
      r.config_index = i;
      std::lock_guard<std::mutex> lock(mu);
      results[i] = std::move(r);
      done[i] = true;
      // seal results in config order so partial output stays a prefix
      while (flush_cursor < n && done[flush_cursor]) {
        if (on_trial_done) on_trial_done(results[flush_cursor]);
        ++flush_cursor;
      }
    }
  };

  int thread_count = workers;
  if (thread_count <= 0)
    thread_count = static_cast<int>(std::thread::hardware_concurrency());
  thread_count = std::max(1, std::min<int>(thread_count,
                                           static_cast<int>(n)));
  if (thread_count == 1) {
    worker_loop();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(thread_count));
    for (int i = 0; i < thread_count; ++i) pool.emplace_back(worker_loop);
    for (auto& t : pool) t.join();
  }

  GridSearchResult out;
  out.trials = std::move(results);
  std::size_t best = 0;
  bool any_ok = false;
  for (std::size_t i = 0; i < out.trials.size(); ++i) {
    if (!out.trials[i].diverged) any_ok = true;
    if (trial_better(out.trials[i], out.trials[best])) best = i;
  }
  if (!any_ok)
    throw AllTrialsDivergedError("grid_search: every trial diverged");
  out.best_index = best;
  return out;
}

}  // namespace tgode
