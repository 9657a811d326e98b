#include "tgode/sparse.hpp"

#include "tgode/errors.hpp"

#include <cmath>
#include <string>

namespace tgode {

SparseMatrix SparseMatrix::from_triplets(
    Index rows, Index cols, const std::vector<Triplet>& triplets) {
  EigenCsr m(rows, cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return from_eigen(std::move(m));
}

SparseMatrix SparseMatrix::identity(Index n) {
  EigenCsr m(n, n);
  m.setIdentity();
  return from_eigen(std::move(m));
}

SparseMatrix SparseMatrix::from_eigen(EigenCsr m) {
  m.prune([](Index, Index, const Scalar& x) { return x != Scalar(0); });
  m.makeCompressed();
  SparseMatrix out;
  out.m_ = std::move(m);
  return out;
}

SparseMatrix SparseMatrix::scaled(Scalar c) const {
  EigenCsr out = m_;
  Scalar* v = out.valuePtr();
  for (Index i = 0; i < out.nonZeros(); ++i) v[i] *= c;
  return from_eigen(std::move(out));
}

Matrix spmm(const SparseMatrix& m, const Eigen::Ref<const Matrix>& x) {
  if (m.cols() != x.rows())
    throw ShapeMismatchError("spmm: " + std::to_string(m.rows()) + "x" +
                             std::to_string(m.cols()) + " * " +
                             std::to_string(x.rows()) + "x" +
                             std::to_string(x.cols()));
  Matrix y = Matrix::Zero(m.rows(), x.cols());
  const auto rp = m.row_ptr();
  const auto ci = m.col_idx();
  const auto vals = m.values();
  for (Index i = 0; i < m.rows(); ++i) {
    auto out = y.row(i);
    for (int k = rp[static_cast<std::size_t>(i)];
         k < rp[static_cast<std::size_t>(i) + 1]; ++k) {
      out += vals[static_cast<std::size_t>(k)] *
             x.row(ci[static_cast<std::size_t>(k)]);
    }
  }
  return y;
}

Matrix spmm_transpose(const SparseMatrix& m,
                      const Eigen::Ref<const Matrix>& g) {
  if (m.rows() != g.rows())
    throw ShapeMismatchError("spmm_transpose: inner dimension mismatch");
  Matrix y = Matrix::Zero(m.cols(), g.cols());
  const auto rp = m.row_ptr();
  const auto ci = m.col_idx();
  const auto vals = m.values();
  for (Index i = 0; i < m.rows(); ++i) {
    const auto gi = g.row(i);
    for (int k = rp[static_cast<std::size_t>(i)];
         k < rp[static_cast<std::size_t>(i) + 1]; ++k) {
      y.row(ci[static_cast<std::size_t>(k)]) +=
          vals[static_cast<std::size_t>(k)] * gi;
    }
  }
  return y;
}

SparseMatrix matmul(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.cols() != b.rows())
    throw ShapeMismatchError("sparse matmul: inner dimension mismatch");
  SparseMatrix::EigenCsr prod = a.eigen() * b.eigen();
  return SparseMatrix::from_eigen(std::move(prod));
}

SparseMatrix normalized_laplacian(const Graph& g) {
  const auto deg = g.degrees();
  for (Index u = 0; u < g.n_nodes(); ++u) {
    if (deg[static_cast<std::size_t>(u)] == 0)
      throw IsolatedNodeError("normalized_laplacian: node " +
                              std::to_string(u) + " has degree 0");
  }
  std::vector<SparseMatrix::Triplet> trips;
  trips.reserve(static_cast<std::size_t>(g.n_nodes() + 2 * g.n_edges()));
  for (Index u = 0; u < g.n_nodes(); ++u) trips.emplace_back(u, u, 1.0);
  for (const auto& [u, v] : g.edges()) {
    const Scalar w =
        -1.0 / std::sqrt(static_cast<Scalar>(deg[static_cast<std::size_t>(u)] *
                                             deg[static_cast<std::size_t>(v)]));
    trips.emplace_back(u, v, w);
    trips.emplace_back(v, u, w);
  }
  return SparseMatrix::from_triplets(g.n_nodes(), g.n_nodes(), trips);
}

std::vector<SparseMatrix> operator_powers(const SparseMatrix& laplacian,
                                          int hops) {
  if (laplacian.rows() != laplacian.cols())
    throw ShapeMismatchError("operator_powers: matrix not square");
  if (hops < 0) throw InvalidValueError("operator_powers: hops must be >= 0");
  std::vector<SparseMatrix> powers;
  powers.reserve(static_cast<std::size_t>(hops) + 1);
  powers.push_back(SparseMatrix::identity(laplacian.rows()));
  for (int k = 1; k <= hops; ++k)
    powers.push_back(matmul(powers.back(), laplacian));
  return powers;
}

}  // namespace tgode
