#pragma once

#include "tgode/graph.hpp"
#include "tgode/types.hpp"

#include <Eigen/SparseCore>

#include <span>
#include <vector>

namespace tgode {

/// CSR matrix with sorted column indices per row and no stored zeros.
/// Backed by Eigen's compressed row-major storage. Immutable after
/// construction; shared read-only across threads.
class SparseMatrix {
 public:
  using Triplet = Eigen::Triplet<Scalar>;
  using EigenCsr = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

  SparseMatrix() = default;

  /// Duplicate triplets are summed; exact zeros are pruned.
  static SparseMatrix from_triplets(Index rows, Index cols,
                                    const std::vector<Triplet>& triplets);
  static SparseMatrix identity(Index n);
  static SparseMatrix from_eigen(EigenCsr m);

  Index rows() const { return m_.rows(); }
  Index cols() const { return m_.cols(); }
  Index nnz() const { return m_.nonZeros(); }

  std::span<const int> row_ptr() const {
    return {m_.outerIndexPtr(), static_cast<std::size_t>(m_.rows()) + 1};
  }
  std::span<const int> col_idx() const {
    return {m_.innerIndexPtr(), static_cast<std::size_t>(m_.nonZeros())};
  }
  std::span<const Scalar> values() const {
    return {m_.valuePtr(), static_cast<std::size_t>(m_.nonZeros())};
  }

  Matrix to_dense() const { return Matrix(m_); }
  const EigenCsr& eigen() const { return m_; }

  /// Same sparsity pattern, values multiplied by c (exact zeros pruned if
  /// c == 0 is not a supported use).
  SparseMatrix scaled(Scalar c) const;

  /// Elementwise map over stored values (zeros stay zero).
  template <typename F>
  SparseMatrix unary_map(F&& f) const {
    EigenCsr out = m_;
    Scalar* v = out.valuePtr();
    for (Index i = 0; i < out.nonZeros(); ++i) v[i] = f(v[i]);
    out.prune([](Index, Index, const Scalar& x) { return x != Scalar(0); });
    return from_eigen(std::move(out));
  }

 private:
  EigenCsr m_;
};

/// y = m * x with a fixed accumulation order: within each row, terms are
/// added in ascending column index.
Matrix spmm(const SparseMatrix& m, const Eigen::Ref<const Matrix>& x);

/// y = m^T * g without materializing the transpose; row-major traversal.
Matrix spmm_transpose(const SparseMatrix& m, const Eigen::Ref<const Matrix>& g);

/// Sparse-sparse product, exact zeros pruned.
SparseMatrix matmul(const SparseMatrix& a, const SparseMatrix& b);

/// L = I - D^{-1/2} A D^{-1/2}. Throws IsolatedNodeError if any degree is 0.
SparseMatrix normalized_laplacian(const Graph& g);

/// [L^0 = I, L^1, ..., L^K], each materialized.
std::vector<SparseMatrix> operator_powers(const SparseMatrix& laplacian,
                                          int hops);

}  // namespace tgode
