#pragma once

#include "tgode/graph.hpp"
#include "tgode/types.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace tgode {

/// One observation of the system: timestamp, node states, optional
/// exogenous inputs.
struct Snapshot {
  Scalar t = 0.0;
  Matrix x;                  // n_nodes x d_x
  std::optional<Matrix> z;   // n_nodes x d_z
};

/// Irregularly timestamped observations over a fixed topology.
/// Timestamps are strictly increasing; gaps need not be equal.
class SnapshotSequence {
 public:
  SnapshotSequence() = default;
  SnapshotSequence(std::vector<Snapshot> entries,
                   std::shared_ptr<const Graph> graph);

  std::size_t size() const { return entries_.size(); }
  const Snapshot& operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<Snapshot>& entries() const { return entries_; }
  const std::shared_ptr<const Graph>& graph() const { return graph_; }

  Index n_nodes() const { return entries_.empty() ? 0 : entries_[0].x.rows(); }
  Index state_dim() const {
    return entries_.empty() ? 0 : entries_[0].x.cols();
  }
  Index exo_dim() const {
    return entries_.empty() || !entries_[0].z ? 0 : entries_[0].z->cols();
  }

  /// Sub-sequence [first, first+count), re-validated.
  SnapshotSequence slice(std::size_t first, std::size_t count) const;

 private:
  std::vector<Snapshot> entries_;
  std::shared_ptr<const Graph> graph_;
};

}  // namespace tgode
