#include "tgode/model.hpp"

#include "tgode/errors.hpp"
#include "tgode/rng.hpp"

#include <cmath>
#include <string>

namespace tgode {

std::int64_t TgodeParams::parameter_count() const {
  std::int64_t n = 0;
  for (const Matrix* m : parameter_list(*this)) n += m->size();
  return n;
}

std::vector<Matrix*> parameter_list(TgodeParams& p) {
  std::vector<Matrix*> out;
  for (Matrix& t : p.theta) out.push_back(&t);
  if (p.encoder) {
    out.push_back(&p.encoder->w1);
    out.push_back(&p.encoder->b1);
    out.push_back(&p.encoder->w2);
    out.push_back(&p.encoder->b2);
  }
  if (p.readout) {
    out.push_back(&p.readout->w1);
    out.push_back(&p.readout->b1);
    out.push_back(&p.readout->w2);
    out.push_back(&p.readout->b2);
  }
  return out;
}

std::vector<const Matrix*> parameter_list(const TgodeParams& p) {
  std::vector<const Matrix*> out;
  for (const Matrix& t : p.theta) out.push_back(&t);
  if (p.encoder) {
    out.push_back(&p.encoder->w1);
    out.push_back(&p.encoder->b1);
    out.push_back(&p.encoder->w2);
    out.push_back(&p.encoder->b2);
  }
  if (p.readout) {
    out.push_back(&p.readout->w1);
    out.push_back(&p.readout->b1);
    out.push_back(&p.readout->w2);
    out.push_back(&p.readout->b2);
  }
  return out;
}

namespace {

void fill_uniform(Matrix& m, Index fan_in, Rng& rng) {
  const Scalar bound = 1.0 / std::sqrt(static_cast<Scalar>(fan_in));
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-bound, bound);
}

}  // namespace

TgodeParams make_params(const ModelShape& shape, std::uint64_t seed) {
  if (shape.hops < 0) throw ConfigError("make_params: hops must be >= 0");
  if (shape.psi_mode == PsiMode::Concat && !shape.embedding)
    throw ConfigError(
        "make_params: psi=concat requires an embedding dimension");
  TgodeParams p;
  p.eps = shape.eps;
  p.activation = shape.activation;
  p.psi_mode = shape.psi_mode;
  const Index h = shape.embedding ? *shape.embedding : shape.state_dim;
  const Index theta_rows = h + shape.exo_dim;

  Rng rng(seed);
  p.theta.resize(static_cast<std::size_t>(shape.hops) + 1);
  for (Matrix& t : p.theta) {
    t.resize(theta_rows, h);
    fill_uniform(t, theta_rows, rng);
  }
  if (shape.embedding) {
    const Index emb = *shape.embedding;
    const Index in =
        shape.psi_mode == PsiMode::Concat ? 2 * shape.state_dim
                                          : shape.state_dim;
    MlpWeights enc;
    enc.w1.resize(in, emb);
    enc.b1.resize(1, emb);
    enc.w2.resize(emb, emb);
    enc.b2.resize(1, emb);
    fill_uniform(enc.w1, in, rng);
    fill_uniform(enc.b1, in, rng);
    fill_uniform(enc.w2, emb, rng);
    fill_uniform(enc.b2, emb, rng);
    p.encoder = std::move(enc);

    MlpWeights ro;
    ro.w1.resize(emb, emb);
    ro.b1.resize(1, emb);
    ro.w2.resize(emb, shape.state_dim);
    ro.b2.resize(1, shape.state_dim);
    fill_uniform(ro.w1, emb, rng);
    fill_uniform(ro.b1, emb, rng);
    fill_uniform(ro.w2, emb, rng);
    fill_uniform(ro.b2, emb, rng);
    p.readout = std::move(ro);
  }
  validate_params(p, shape.state_dim, shape.exo_dim);
  return p;
}

void validate_params(const TgodeParams& p, Index d_x, Index d_z) {
  if (p.theta.empty()) throw ConfigError("params: no theta matrices");
  if (!(p.eps > 0.0)) throw ConfigError("params: eps must be positive");
  if (p.encoder.has_value() != p.readout.has_value())
    throw ConfigError("params: encoder and readout must be present together");
  if (p.psi_mode == PsiMode::Concat && !p.encoder)
    throw ConfigError("params: psi=concat requires an encoder");

  const Index h = p.encoder ? p.encoder->w2.cols() : d_x;
  for (const Matrix& t : p.theta) {
    if (t.rows() != h + d_z || t.cols() != h)
      throw ConfigError("params: theta must be " + std::to_string(h + d_z) +
                        "x" + std::to_string(h));
  }
  if (p.encoder) {
    const Index in = p.psi_mode == PsiMode::Concat ? 2 * d_x : d_x;
    const MlpWeights& e = *p.encoder;
    if (e.w1.rows() != in || e.b1.rows() != 1 ||
        e.b1.cols() != e.w1.cols() || e.w2.rows() != e.w1.cols() ||
        e.w2.cols() != h || e.b2.rows() != 1 || e.b2.cols() != h)
      throw ConfigError("params: encoder shapes inconsistent");
    const MlpWeights& r = *p.readout;
    if (r.w1.rows() != h || r.b1.rows() != 1 || r.b1.cols() != r.w1.cols() ||
        r.w2.rows() != r.w1.cols() || r.w2.cols() != d_x ||
        r.b2.rows() != 1 || r.b2.cols() != d_x)
      throw ConfigError("params: readout shapes inconsistent");
  }
}

std::int64_t steps_for_interval(Scalar dt, Scalar eps) {
  if (!(dt > 0.0))
    throw InvalidValueError("steps_for_interval: dt must be positive");
  if (!(eps > 0.0))
    throw InvalidValueError("steps_for_interval: eps must be positive");
  const Scalar q = dt / eps;
  const Scalar r = std::round(q);
  std::int64_t n;
  if (r >= 1.0 && std::abs(q - r) <= 1e-9 * std::max(Scalar(1), q))
    n = static_cast<std::int64_t>(r);  // exact multiple up to fp noise
  else
    n = static_cast<std::int64_t>(std::ceil(q));
  return std::max<std::int64_t>(1, n);
}

IntervalPlan plan_interval(Scalar t_prev, Scalar t_next, Scalar eps) {
  IntervalPlan plan;
  plan.dt = t_next - t_prev;
  plan.eps = eps;
  plan.n_steps = steps_for_interval(plan.dt, eps);
  return plan;
}

Matrix psi_combine(const Eigen::Ref<const Matrix>& observed,
                   const Eigen::Ref<const Matrix>& predicted, PsiMode mode) {
  if (observed.rows() != predicted.rows())
    throw ShapeMismatchError("psi_combine: row count mismatch");
  switch (mode) {
    case PsiMode::Replace:
      return observed;
    case PsiMode::Sum:
      if (observed.cols() != predicted.cols())
        throw ShapeMismatchError("psi_combine: column count mismatch");
      return observed + predicted;
    case PsiMode::Concat: {
      Matrix out(observed.rows(), observed.cols() + predicted.cols());
      out.leftCols(observed.cols()) = observed;
      out.rightCols(predicted.cols()) = predicted;
      return out;
    }
  }
  return observed;
}

DiffValue euler_rollout(Tape& tape, DiffValue x0_latent,
                        const SparseMatrix& laplacian,
                        const std::vector<DiffValue>& theta,
                        std::optional<DiffValue> exo, Activation act,
                        const IntervalPlan& plan) {
  if (plan.n_steps < 1)
    throw InvalidValueError("euler_rollout: n_steps must be >= 1");
  DiffValue x = x0_latent;
  for (std::int64_t s = 0; s < plan.n_steps; ++s) {
    const DiffValue u = exo ? tape.concat_cols(x, *exo) : x;
    DiffValue acc = tape.matmul(u, theta[0]);
    DiffValue hop = u;
    for (std::size_t k = 1; k < theta.size(); ++k) {
      hop = tape.spmm_const(&laplacian, hop);
      acc = tape.add(acc, tape.matmul(hop, theta[k]));
    }
    const DiffValue active = tape.ewise_activation(act, acc);
    x = tape.add(x, tape.scale(plan.eps, active));
    if (!tape.value(x).allFinite())
      throw NumericOverflowError("euler_rollout: non-finite state");
  }
  return x;
}

namespace {

struct LeafMlp {
  DiffValue w1, b1, w2, b2;
};

DiffValue tape_mlp(Tape& tape, DiffValue x, const LeafMlp& w, DiffValue ones,
                   Activation act) {
  DiffValue h =
      tape.add(tape.matmul(x, w.w1), tape.matmul(ones, w.b1));
  h = tape.ewise_activation(act, h);
  return tape.add(tape.matmul(h, w.w2), tape.matmul(ones, w.b2));
}

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

SequenceRun run_sequence(Tape& tape, const TgodeParams& params,
                         const SparseMatrix& laplacian,
                         const SnapshotSequence& seq, bool trainable) {
  if (seq.size() < 2)
    throw InvalidValueError("run_sequence: need at least 2 snapshots");
  validate_params(params, seq.state_dim(), seq.exo_dim());

  SequenceRun run;
  const auto plist = parameter_list(params);
  for (const Matrix* m : plist)
    run.param_leaves.push_back(tape.leaf(*m, trainable));

  const std::size_t n_theta = params.theta.size();
  std::vector<DiffValue> theta(run.param_leaves.begin(),
                               run.param_leaves.begin() +
                                   static_cast<std::ptrdiff_t>(n_theta));
  std::optional<LeafMlp> enc, ro;
  if (params.encoder) {
    enc = LeafMlp{run.param_leaves[n_theta], run.param_leaves[n_theta + 1],
                  run.param_leaves[n_theta + 2], run.param_leaves[n_theta + 3]};
    ro = LeafMlp{run.param_leaves[n_theta + 4], run.param_leaves[n_theta + 5],
                 run.param_leaves[n_theta + 6], run.param_leaves[n_theta + 7]};
  }

  const Index n = seq.n_nodes();
  const DiffValue ones = tape.leaf(Matrix::Ones(n, 1));
  const std::size_t t_count = seq.size() - 1;

  std::optional<DiffValue> prev_pred;
  DiffValue loss_acc;
  for (std::size_t i = 1; i < seq.size(); ++i) {
    const Snapshot& prev = seq[i - 1];
    const Snapshot& cur = seq[i];
    const DiffValue obs = tape.leaf(prev.x);

    DiffValue combined;
    switch (params.psi_mode) {
      case PsiMode::Replace:
        combined = obs;
        break;
      case PsiMode::Sum: {
        const DiffValue pred_in =
            prev_pred ? *prev_pred
                      : tape.leaf(Matrix::Zero(prev.x.rows(), prev.x.cols()));
        combined = tape.add(obs, pred_in);
        break;
      }
      case PsiMode::Concat: {
        const DiffValue pred_in =
            prev_pred ? *prev_pred
                      : tape.leaf(Matrix::Zero(prev.x.rows(), prev.x.cols()));
        combined = tape.concat_cols(obs, pred_in);
        break;
      }
    }

    DiffValue latent =
        enc ? tape_mlp(tape, combined, *enc, ones, params.activation)
            : combined;
    std::optional<DiffValue> exo;
    if (prev.z) exo = tape.leaf(*prev.z);
    const IntervalPlan plan = plan_interval(prev.t, cur.t, params.eps);
    latent = euler_rollout(tape, latent, laplacian, theta, exo,
                           params.activation, plan);
    const DiffValue pred =
        ro ? tape_mlp(tape, latent, *ro, ones, params.activation) : latent;
    run.predictions.push_back(pred);
    prev_pred = pred;

    const DiffValue target = tape.leaf(cur.x);
    const DiffValue err = tape.reduce_mean_abs_error(pred, target);
    loss_acc = (i == 1) ? err : tape.add(loss_acc, err);
  }
  run.loss = tape.scale(1.0 / static_cast<Scalar>(t_count), loss_acc);
  return run;
}

std::vector<Matrix> predict_sequence(const TgodeParams& params,
                                     const SparseMatrix& laplacian,
                                     const SnapshotSequence& seq) {
  if (seq.size() < 2)
    throw InvalidValueError("predict_sequence: need at least 2 snapshots");
  validate_params(params, seq.state_dim(), seq.exo_dim());

  std::vector<Matrix> predictions;
  predictions.reserve(seq.size() - 1);
  Matrix prev_pred;  // empty until the first prediction exists
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
      Matrix hop = u;
      for (std::size_t k = 1; k < params.theta.size(); ++k) {
        hop = spmm(laplacian, hop);
        Matrix term;
        term.noalias() = hop * params.theta[k];
        acc = acc + term;
      }
      const Matrix active = plain_activation(params.activation, acc);
      const Matrix scaled = plan.eps * active;
      state = state + scaled;
      if (!state.allFinite())
        throw NumericOverflowError("predict_sequence: non-finite state");
    }
    Matrix pred =
        params.readout ? plain_mlp(*params.readout, state, params.activation)
                       : state;
    prev_pred = pred;
    predictions.push_back(std::move(pred));
  }
  return predictions;
}

Scalar sequence_mae(const TgodeParams& params, const SparseMatrix& laplacian,
                    const SnapshotSequence& seq) {
  const auto preds = predict_sequence(params, laplacian, seq);
  Scalar total = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    total += (preds[i] - seq[i + 1].x).array().abs().mean();
  return total / static_cast<Scalar>(preds.size());
}

}  // namespace tgode
