#include "tgode/snapshot.hpp"

#include "tgode/errors.hpp"

#include <string>

namespace tgode {

SnapshotSequence::SnapshotSequence(std::vector<Snapshot> entries,
                                   std::shared_ptr<const Graph> graph)
    : entries_(std::move(entries)), graph_(std::move(graph)) {
  if (entries_.empty()) throw EmptySequenceError("snapshot sequence is empty");
  const Index n = entries_[0].x.rows();
  const Index d = entries_[0].x.cols();
  const bool has_z = entries_[0].z.has_value();
  const Index dz = has_z ? entries_[0].z->cols() : 0;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const Snapshot& s = entries_[i];
    if (s.x.rows() != n || s.x.cols() != d)
      throw ShapeMismatchError("snapshot " + std::to_string(i) +
                               ": state shape differs from first snapshot");
    if (s.z.has_value() != has_z ||
        (has_z && (s.z->rows() != n || s.z->cols() != dz)))
      throw ShapeMismatchError("snapshot " + std::to_string(i) +
                               ": exogenous shape differs from first snapshot");
    if (i > 0 && !(s.t > entries_[i - 1].t))
      throw NonMonotonicTimestampsError(
          "timestamps not strictly increasing at index " + std::to_string(i));
  }
  if (graph_ && graph_->n_nodes() != n)
    throw ShapeMismatchError("snapshot rows != graph node count");
}

SnapshotSequence SnapshotSequence::slice(std::size_t first,
                                         std::size_t count) const {
  if (first + count > entries_.size())
    throw CountTooLargeError("slice: range exceeds sequence length");
  std::vector<Snapshot> part(entries_.begin() + static_cast<std::ptrdiff_t>(first),
                             entries_.begin() +
                                 static_cast<std::ptrdiff_t>(first + count));
  return SnapshotSequence(std::move(part), graph_);
}

}  // namespace tgode
