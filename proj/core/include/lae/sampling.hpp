#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lae {

using IndexBatch = std::vector<std::size_t>;

/// Rows of a dataset grouped by integer class label.
class ClassIndex {
public:
  ClassIndex(std::span<const int> labels, int num_classes);

  int num_classes() const noexcept { return static_cast<int>(rows_.size()); }
  std::size_t num_rows() const noexcept { return labels_.size(); }
  const std::vector<std::size_t>& rows(int label) const { return rows_.at(static_cast<std::size_t>(label)); }
  /// Classes with at least one row, ascending.
  const std::vector<int>& nonempty_classes() const noexcept { return nonempty_; }
  int class_of(std::size_t row) const { return labels_.at(row); }

private:
  std::vector<std::vector<std::size_t>> rows_;
  std::vector<int> nonempty_;
  std::vector<int> labels_;
};

/// Shuffled minibatches over 0..n-1. The permutation is derived from
/// (seed, epoch); the last batch may be short.
std::vector<IndexBatch> instance_sampler(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                                         std::uint64_t epoch);

/// Two-level draw with replacement: a class uniformly from the non-empty
/// classes, then a row uniformly from that class. Emits `batches` batches
/// of exactly `batch_size` rows.
std::vector<IndexBatch> class_balanced_sampler(const ClassIndex& index, std::size_t batches,
                                               std::size_t batch_size, std::uint64_t seed);

/// Number of batches a shuffled epoch over n rows produces.
std::size_t batches_per_epoch(std::size_t n, std::size_t batch_size);

} // namespace lae
