#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_helpers.hpp"
#include "tgode/errors.hpp"
#include "tgode/sparse.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace tgode;
using test::max_rel_error;
using test::random_connected_graph;
using test::random_matrix;

namespace {

Graph path_graph(Index n) {
  std::vector<std::pair<Index, Index>> edges;
  for (Index i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return Graph::from_edges(n, std::move(edges));
}

Graph cycle_graph(Index n) {
  std::vector<std::pair<Index, Index>> edges;
  for (Index i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return Graph::from_edges(n, std::move(edges));
}

void check_csr_invariants(const SparseMatrix& m) {
  const auto rp = m.row_ptr();
  const auto ci = m.col_idx();
  const auto vals = m.values();
  REQUIRE(rp.size() == static_cast<std::size_t>(m.rows()) + 1);
  CHECK(rp[0] == 0);
  CHECK(rp[rp.size() - 1] == m.nnz());
  for (std::size_t i = 0; i + 1 < rp.size(); ++i) {
    CHECK(rp[i] <= rp[i + 1]);
    for (int k = rp[i] + 1; k < rp[i + 1]; ++k)
      CHECK(ci[static_cast<std::size_t>(k) - 1] <
            ci[static_cast<std::size_t>(k)]);  // strictly increasing
  }
  for (std::size_t k = 0; k < vals.size(); ++k) {
    CHECK(vals[k] != 0.0);  // no stored zeros
    CHECK(ci[k] < m.cols());
  }
}

}  // namespace

TEST_CASE("normalized laplacian of the 2-node path") {
  const SparseMatrix lap = normalized_laplacian(path_graph(2));
  Matrix expected(2, 2);
  expected << 1.0, -1.0, -1.0, 1.0;
  CHECK(lap.to_dense() == expected);
  check_csr_invariants(lap);
}

TEST_CASE("normalized laplacian of the 3-node path") {
  const SparseMatrix lap = normalized_laplacian(path_graph(3));
  const Matrix d = lap.to_dense();
  CHECK(d(0, 0) == 1.0);
  CHECK(d(1, 1) == 1.0);
  CHECK(d(2, 2) == 1.0);
  CHECK(d(0, 1) == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(d(0, 2) == 0.0);
}

TEST_CASE("isolated nodes are rejected") {
  const Graph g = Graph::from_edges(3, {{0, 1}});  // node 2 isolated
  CHECK_THROWS_AS(normalized_laplacian(g), IsolatedNodeError);
}

TEST_CASE("laplacian is symmetric with spectrum in [0, 2]") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Graph g = random_connected_graph(4 + static_cast<Index>(seed), 5,
                                           100 + seed);
    const SparseMatrix lap = normalized_laplacian(g);
    const Matrix d = lap.to_dense();
    CHECK(d == d.transpose().eval());  // values constructed symmetrically
    Eigen::SelfAdjointEigenSolver<Matrix> es(d);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
    CHECK(es.eigenvalues().maxCoeff() <= 2.0 + 1e-12);
    check_csr_invariants(lap);
  }
}

TEST_CASE("spmm by the identity is exact") {
  Rng rng(7);
  const Matrix x = random_matrix(5, 3, rng);
  const SparseMatrix eye = SparseMatrix::identity(5);
  CHECK(spmm(eye, x) == x);
}

TEST_CASE("spmm on the 2-node path by hand") {
  const SparseMatrix lap = normalized_laplacian(path_graph(2));
  Matrix x(2, 1);
  x << 1.0, 0.0;
  Matrix expected(2, 1);
  expected << 1.0, -1.0;
  CHECK(spmm(lap, x) == expected);
}

TEST_CASE("constant vector lies in the kernel on a regular graph") {
  const SparseMatrix lap = normalized_laplacian(cycle_graph(6));
  const Matrix ones = Matrix::Ones(6, 1);
  CHECK(spmm(lap, ones).cwiseAbs().maxCoeff() == 0.0);  // -1/2 is exact
}

TEST_CASE("spmm shape mismatch") {
  const SparseMatrix eye = SparseMatrix::identity(3);
  CHECK_THROWS_AS(spmm(eye, Matrix::Zero(4, 1)), ShapeMismatchError);
}

TEST_CASE("spmm is linear") {
  Rng rng(11);
  const Graph g = random_connected_graph(8, 6, 42);
  const SparseMatrix lap = normalized_laplacian(g);
  const Matrix x = random_matrix(8, 2, rng);
  const Matrix y = random_matrix(8, 2, rng);
  const Scalar a = 0.37, b = -1.25;
  const Matrix lhs = spmm(lap, a * x + b * y);
  const Matrix rhs = a * spmm(lap, x) + b * spmm(lap, y);
  CHECK(max_rel_error(lhs, rhs) <= 1e-12);
}

TEST_CASE("spmm_transpose matches the dense transpose") {
  Rng rng(13);
  const Graph g = random_connected_graph(7, 9, 5);
  const SparseMatrix lap = normalized_laplacian(g);
  const Matrix gmat = random_matrix(7, 3, rng);
  const Matrix expected = lap.to_dense().transpose() * gmat;
  CHECK(max_rel_error(spmm_transpose(lap, gmat), expected) <= 1e-12);
}

TEST_CASE("operator powers: zero hops is the identity") {
  const SparseMatrix lap = normalized_laplacian(path_graph(4));
  const auto powers = operator_powers(lap, 0);
  REQUIRE(powers.size() == 1);
  CHECK(powers[0].to_dense() == Matrix::Identity(4, 4));
}

TEST_CASE("operator powers: hand-squared 2-node path") {
  const SparseMatrix lap = normalized_laplacian(path_graph(2));
  const auto powers = operator_powers(lap, 2);
  Matrix expected(2, 2);
  expected << 2.0, -2.0, -2.0, 2.0;
  CHECK(powers[2].to_dense() == expected);
}

TEST_CASE("fill grows with the hop count on a connected graph") {
  const SparseMatrix lap = normalized_laplacian(build_grid_graph(3, 3));
  const auto powers = operator_powers(lap, 4);
  for (std::size_t k = 0; k + 1 < powers.size(); ++k)
    CHECK(powers[k].nnz() <= powers[k + 1].nnz());
  for (const auto& p : powers) check_csr_invariants(p);
}

TEST_CASE("powers satisfy the recursion against repeated spmm") {
  Rng rng(17);
  const SparseMatrix lap = normalized_laplacian(build_grid_graph(3, 4));
  const auto powers = operator_powers(lap, 3);
  const Matrix x = random_matrix(12, 2, rng);
  for (std::size_t k = 1; k < powers.size(); ++k) {
    const Matrix lhs = spmm(powers[k], x);
    const Matrix rhs = spmm(lap, spmm(powers[k - 1], x));
    CHECK(max_rel_error(lhs, rhs) <= 1e-10);
  }
}

TEST_CASE("construction prunes exact zeros") {
  std::vector<SparseMatrix::Triplet> trips{{0, 0, 1.0}, {0, 1, 0.5},
                                           {0, 1, -0.5}, {1, 1, 0.0}};
  const SparseMatrix m = SparseMatrix::from_triplets(2, 2, trips);
  CHECK(m.nnz() == 1);  // the cancelling and explicit zeros are gone
  check_csr_invariants(m);
}
