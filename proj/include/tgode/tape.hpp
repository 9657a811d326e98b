#pragma once

#include "tgode/sparse.hpp"
#include "tgode/types.hpp"

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace tgode {

/// Handle to a tape node: index plus cached shape.
struct DiffValue {
  std::int32_t id = -1;
  Index rows = 0;
  Index cols = 0;
};

/// Append-only record of dense-matrix operations for reverse-mode
/// differentiation. Nodes are topologically ordered by construction.
/// One tape per training run; not shared between threads.
class Tape {
 public:
  DiffValue leaf(Matrix value, bool requires_grad = false);

  DiffValue matmul(DiffValue a, DiffValue b);
  /// Sparse operand is a constant; no gradient flows into it. The pointer
  /// must outlive the tape.
  DiffValue spmm_const(const SparseMatrix* m, DiffValue x);
  DiffValue add(DiffValue a, DiffValue b);
  DiffValue scale(Scalar c, DiffValue a);
  DiffValue ewise_activation(Activation f, DiffValue a);
  DiffValue concat_cols(DiffValue a, DiffValue b);
  /// Mean of entrywise absolute differences; 1x1 result.
  DiffValue reduce_mean_abs_error(DiffValue pred, DiffValue target);

  const Matrix& value(DiffValue v) const;
  std::size_t size() const { return nodes_.size(); }

  /// Smallest |entry| seen among inputs of activations of the given kind;
  /// +inf when none were recorded. Flags kink-adjacent evaluations where
  /// finite differencing of relu is unreliable.
  Scalar min_activation_input_magnitude(Activation f) const;
  /// Smallest |pred - target| entry over recorded mean-abs-error nodes;
  /// +inf when none.
  Scalar min_abs_error_gap() const;

  /// d(root)/d(leaf) for every leaf marked trainable, keyed by node id.
  /// Fan-out accumulates by summation; the root must be 1x1.
  std::unordered_map<std::int32_t, Matrix> backward(DiffValue root) const;

  /// Clears recorded nodes, keeping allocated capacity.
  void reset() { nodes_.clear(); }

 private:
  enum class Op : std::uint8_t {
    Leaf,
    MatMul,
    Spmm,
    Add,
    Scale,
    Ewise,
    ConcatCols,
    MeanAbsError,
  };

  struct Node {
    Op op = Op::Leaf;
    std::int32_t a = -1;
    std::int32_t b = -1;
    Scalar scalar = 0.0;
    Activation act = Activation::Identity;
    const SparseMatrix* sparse = nullptr;
    Matrix value;
    bool requires_grad = false;
  };

  DiffValue push(Node node);
  const Matrix& val(std::int32_t id) const {
    return nodes_[static_cast<std::size_t>(id)].value;
  }

  std::vector<Node> nodes_;
};

}  // namespace tgode
