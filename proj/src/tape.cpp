#include "tgode/tape.hpp"

#include "tgode/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace tgode {

namespace {

Matrix apply_activation(Activation f, const Matrix& x) {
  switch (f) {
    case Activation::Tanh: return x.array().tanh().matrix();
    case Activation::Relu: return x.cwiseMax(0.0);
    case Activation::Identity: return x;
  }
  return x;
}

}  // namespace

DiffValue Tape::push(Node node) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  DiffValue v{id, node.value.rows(), node.value.cols()};
  nodes_.push_back(std::move(node));
  return v;
}

DiffValue Tape::leaf(Matrix value, bool requires_grad) {
  Node n;
  n.op = Op::Leaf;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  return push(std::move(n));
}

DiffValue Tape::matmul(DiffValue a, DiffValue b) {
  if (a.cols != b.rows)
    throw ShapeMismatchError("tape matmul: " + std::to_string(a.rows) + "x" +
                             std::to_string(a.cols) + " * " +
                             std::to_string(b.rows) + "x" +
                             std::to_string(b.cols));
  Node n;
  n.op = Op::MatMul;
  n.a = a.id;
  n.b = b.id;
  n.value.noalias() = val(a.id) * val(b.id);
  return push(std::move(n));
}

DiffValue Tape::spmm_const(const SparseMatrix* m, DiffValue x) {
  Node n;
  n.op = Op::Spmm;
  n.a = x.id;
  n.sparse = m;
  n.value = spmm(*m, val(x.id));
  return push(std::move(n));
}

DiffValue Tape::add(DiffValue a, DiffValue b) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw ShapeMismatchError("tape add: shape mismatch");
  Node n;
  n.op = Op::Add;
  n.a = a.id;
  n.b = b.id;
  n.value = val(a.id) + val(b.id);
  return push(std::move(n));
}

DiffValue Tape::scale(Scalar c, DiffValue a) {
  Node n;
  n.op = Op::Scale;
  n.a = a.id;
  n.scalar = c;
  n.value = c * val(a.id);
  return push(std::move(n));
}

DiffValue Tape::ewise_activation(Activation f, DiffValue a) {
  Node n;
  n.op = Op::Ewise;
  n.a = a.id;
  n.act = f;
  n.value = apply_activation(f, val(a.id));
  return push(std::move(n));
}

DiffValue Tape::concat_cols(DiffValue a, DiffValue b) {
  if (a.rows != b.rows)
    throw ShapeMismatchError("tape concat_cols: row count mismatch");
  Node n;
  n.op = Op::ConcatCols;
  n.a = a.id;
  n.b = b.id;
  n.value.resize(a.rows, a.cols + b.cols);
  n.value.leftCols(a.cols) = val(a.id);
  n.value.rightCols(b.cols) = val(b.id);
  return push(std::move(n));
}

DiffValue Tape::reduce_mean_abs_error(DiffValue pred, DiffValue target) {
  if (pred.rows != target.rows || pred.cols != target.cols)
    throw ShapeMismatchError("tape reduce_mean_abs_error: shape mismatch");
  Node n;
  n.op = Op::MeanAbsError;
  n.a = pred.id;
  n.b = target.id;
  n.value.resize(1, 1);
  n.value(0, 0) = (val(pred.id) - val(target.id)).array().abs().mean();
  return push(std::move(n));
}

const Matrix& Tape::value(DiffValue v) const { return val(v.id); }

Scalar Tape::min_activation_input_magnitude(Activation f) const {
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (const Node& node : nodes_) {
    if (node.op != Op::Ewise || node.act != f) continue;
    best = std::min(best, val(node.a).cwiseAbs().minCoeff());
  }
  return best;
}

Scalar Tape::min_abs_error_gap() const {
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (const Node& node : nodes_) {
    if (node.op != Op::MeanAbsError) continue;
    best = std::min(best,
                    (val(node.a) - val(node.b)).cwiseAbs().minCoeff());
  }
  return best;
}

std::unordered_map<std::int32_t, Matrix> Tape::backward(DiffValue root) const {
  if (root.rows != 1 || root.cols != 1)
    throw NonScalarRootError("backward: root must be 1x1");

  std::vector<Matrix> grads(static_cast<std::size_t>(root.id) + 1);
  auto accumulate = [&](std::int32_t id, const auto& g) {
    Matrix& slot = grads[static_cast<std::size_t>(id)];
    if (slot.size() == 0) {
      const Node& node = nodes_[static_cast<std::size_t>(id)];
      slot = Matrix::Zero(node.value.rows(), node.value.cols());
    }
    slot += g;
  };

  grads[static_cast<std::size_t>(root.id)] = Matrix::Constant(1, 1, 1.0);

  for (std::int32_t i = root.id; i >= 0; --i) {
    const Matrix& g = grads[static_cast<std::size_t>(i)];
    if (g.size() == 0) continue;  // not on any path to the root
    const Node& node = nodes_[static_cast<std::size_t>(i)];
    switch (node.op) {
      case Op::Leaf:
        break;
      case Op::MatMul:
        accumulate(node.a, g * val(node.b).transpose());
        accumulate(node.b, val(node.a).transpose() * g);
        break;
      case Op::Spmm:
        accumulate(node.a, spmm_transpose(*node.sparse, g));
        break;
      case Op::Add:
        accumulate(node.a, g);
        accumulate(node.b, g);
        break;
      case Op::Scale:
        accumulate(node.a, node.scalar * g);
        break;
      case Op::Ewise: {
        switch (node.act) {
          case Activation::Tanh:
            // 1 - y^2, using the stored output
            accumulate(node.a,
                       (g.array() * (1.0 - node.value.array().square()))
                           .matrix());
            break;
          case Activation::Relu:
            // subgradient 0 at exactly 0
            accumulate(node.a, (g.array() *
                                (val(node.a).array() > 0.0).cast<Scalar>())
                                   .matrix());
            break;
          case Activation::Identity:
            accumulate(node.a, g);
            break;
        }
        break;
      }
      case Op::ConcatCols: {
        const Index ac = val(node.a).cols();
        const Index bc = val(node.b).cols();
        accumulate(node.a, g.leftCols(ac));
        accumulate(node.b, g.rightCols(bc));
        break;
      }
      case Op::MeanAbsError: {
        const Matrix diff = val(node.a) - val(node.b);
        const Scalar inv =
            g(0, 0) / static_cast<Scalar>(diff.rows() * diff.cols());
        const Matrix s =
            diff.array().sign().matrix() * inv;  // sign(0) = 0
        accumulate(node.a, s);
        accumulate(node.b, -s);
        break;
      }
    }
    // free intermediate buffers as soon as they are consumed
    if (!node.requires_grad && node.op != Op::Leaf)
      grads[static_cast<std::size_t>(i)] = Matrix();
  }

  std::unordered_map<std::int32_t, Matrix> out;
  for (std::int32_t i = 0; i <= root.id; ++i) {
    const Node& node = nodes_[static_cast<std::size_t>(i)];
    if (!node.requires_grad) continue;
    Matrix& slot = grads[static_cast<std::size_t>(i)];
    if (slot.size() == 0)
      slot = Matrix::Zero(node.value.rows(), node.value.cols());
    out.emplace(i, std::move(slot));
  }
  return out;
}

}  // namespace tgode
