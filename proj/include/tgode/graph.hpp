#pragma once

#include "tgode/types.hpp"

#include <utility>
#include <vector>

namespace tgode {

/// Undirected simple graph. Edges are stored once with u < v, sorted.
/// Immutable after construction; safe to share read-only across threads.
class Graph {
 public:
  /// Normalizes edge orientation, rejects self-loops, collapses duplicates
  /// (first occurrence wins for attributes), validates endpoints.
  static Graph from_edges(Index n_nodes,
                          std::vector<std::pair<Index, Index>> edges,
                          Matrix edge_attrs = Matrix());

  Index n_nodes() const { return n_nodes_; }
  Index n_edges() const { return static_cast<Index>(edges_.size()); }
  const std::vector<std::pair<Index, Index>>& edges() const { return edges_; }

  bool has_edge_attrs() const { return edge_attrs_.size() > 0; }
  /// n_edges x d_e, rows aligned with edges(); 0x0 when absent.
  const Matrix& edge_attrs() const { return edge_attrs_; }

  std::vector<Index> degrees() const;

 private:
  Graph() = default;
  Index n_nodes_ = 0;
  std::vector<std::pair<Index, Index>> edges_;
  Matrix edge_attrs_;
};

/// rows x cols lattice; node id = r*cols + c, edges between horizontal and
/// vertical neighbours.
Graph build_grid_graph(Index rows, Index cols);

}  // namespace tgode
