#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tgode/errors.hpp"
#include "tgode/graph.hpp"

using namespace tgode;

TEST_CASE("smallest lattice") {
  const Graph g = build_grid_graph(1, 2);
  CHECK(g.n_nodes() == 2);
  CHECK(g.n_edges() == 1);
  CHECK(g.edges()[0] == std::make_pair<Index, Index>(0, 1));
}

TEST_CASE("7x10 lattice matches the closed-form edge count") {
  const Graph g = build_grid_graph(7, 10);
  CHECK(g.n_nodes() == 70);
  CHECK(g.n_edges() == 123);  // 7*9 + 10*6
}

TEST_CASE("3x3 lattice enumerated by hand") {
  const Graph g = build_grid_graph(3, 3);
  CHECK(g.n_nodes() == 9);
  CHECK(g.n_edges() == 12);
  const auto deg = g.degrees();
  CHECK(deg[4] == 4);  // center node
  CHECK(deg[0] == 2);  // corner
  CHECK(deg[1] == 3);  // edge midpoint
}

TEST_CASE("lattice edges connect only adjacent cells") {
  const Graph g = build_grid_graph(4, 5);
  for (const auto& [u, v] : g.edges()) {
    const Index ru = u / 5, cu = u % 5;
    const Index rv = v / 5, cv = v % 5;
    CHECK(std::abs(ru - rv) + std::abs(cu - cv) == 1);
  }
}

TEST_CASE("from_edges normalizes orientation and deduplicates") {
  const Graph g = Graph::from_edges(3, {{2, 0}, {0, 2}, {1, 2}});
  CHECK(g.n_edges() == 2);
  CHECK(g.edges()[0] == std::make_pair<Index, Index>(0, 2));
  CHECK(g.edges()[1] == std::make_pair<Index, Index>(1, 2));
}

TEST_CASE("self-loops are rejected") {
  CHECK_THROWS_AS(Graph::from_edges(2, {{1, 1}}), SelfLoopError);
}

TEST_CASE("out-of-range endpoints are rejected") {
  CHECK_THROWS_AS(Graph::from_edges(2, {{0, 2}}), InvalidValueError);
}

TEST_CASE("degenerate lattice dimensions are rejected") {
  CHECK_THROWS_AS(build_grid_graph(0, 3), InvalidValueError);
  CHECK_THROWS_AS(build_grid_graph(3, 0), InvalidValueError);
}

TEST_CASE("edge attributes follow deduplication") {
  Matrix attrs(3, 2);
  attrs << 1.0, 2.0, 3.0, 4.0, 5.0, 6.0;
  const Graph g = Graph::from_edges(3, {{2, 0}, {0, 2}, {1, 2}}, attrs);
  REQUIRE(g.has_edge_attrs());
  CHECK(g.edge_attrs().rows() == 2);
  // first occurrence of (0,2) wins
  CHECK(g.edge_attrs()(0, 0) == 1.0);
  CHECK(g.edge_attrs()(1, 0) == 5.0);
}
