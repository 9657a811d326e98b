#include "tgode/graph.hpp"

#include "tgode/errors.hpp"

#include <algorithm>
#include <string>

namespace tgode {

Graph Graph::from_edges(Index n_nodes,
                        std::vector<std::pair<Index, Index>> edges,
                        Matrix edge_attrs) {
  if (n_nodes < 0) throw InvalidValueError("graph: negative node count");
  const bool has_attrs = edge_attrs.size() > 0;
  if (has_attrs && edge_attrs.rows() != static_cast<Index>(edges.size()))
    throw ShapeMismatchError("graph: edge_attrs rows != edge count");

  std::vector<std::size_t> order(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    auto& [u, v] = edges[i];
    if (u == v)
      throw SelfLoopError("graph: self-loop at node " + std::to_string(u));
    if (u < 0 || v < 0 || u >= n_nodes || v >= n_nodes)
      throw InvalidValueError("graph: edge endpoint out of range: (" +
                              std::to_string(u) + ", " + std::to_string(v) +
                              ")");
    if (u > v) std::swap(u, v);
    order[i] = i;
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a,
                                                   std::size_t b) {
    return edges[a] < edges[b];
  });

  Graph g;
  g.n_nodes_ = n_nodes;
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    if (!g.edges_.empty() && g.edges_.back() == edges[i]) continue;
    g.edges_.push_back(edges[i]);
    kept.push_back(i);
  }
  if (has_attrs) {
    g.edge_attrs_.resize(static_cast<Index>(kept.size()), edge_attrs.cols());
    for (std::size_t i = 0; i < kept.size(); ++i)
      g.edge_attrs_.row(static_cast<Index>(i)) =
          edge_attrs.row(static_cast<Index>(kept[i]));
  }
  return g;
}

std::vector<Index> Graph::degrees() const {
  std::vector<Index> deg(static_cast<std::size_t>(n_nodes_), 0);
  for (const auto& [u, v] : edges_) {
    ++deg[static_cast<std::size_t>(u)];
    ++deg[static_cast<std::size_t>(v)];
  }
  return deg;
}

Graph build_grid_graph(Index rows, Index cols) {
  if (rows < 1 || cols < 1)
    throw InvalidValueError("build_grid_graph: rows and cols must be >= 1");
  std::vector<std::pair<Index, Index>> edges;
  edges.reserve(static_cast<std::size_t>(rows * (cols - 1) + cols * (rows - 1)));
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      const Index u = r * cols + c;
      if (c + 1 < cols) edges.emplace_back(u, u + 1);
      if (r + 1 < rows) edges.emplace_back(u, u + cols);
    }
  }
  return Graph::from_edges(rows * cols, std::move(edges));
}

}  // namespace tgode
