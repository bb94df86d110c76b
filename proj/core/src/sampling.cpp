#include "lae/sampling.hpp"

#include "lae/error.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

namespace lae {

namespace {

// Distinct streams keep the two samplers independent under the same seed.
constexpr std::uint64_t kInstanceStream = 0x1A5E'0001;
constexpr std::uint64_t kBalancedStream = 0x1A5E'0002;

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t epoch) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(epoch),
                    static_cast<std::uint32_t>(epoch >> 32)};
  return std::mt19937_64(seq);
}

} // namespace

ClassIndex::ClassIndex(std::span<const int> labels, int num_classes)
    : rows_(static_cast<std::size_t>(std::max(num_classes, 0))), labels_(labels.begin(), labels.end()) {
  if (num_classes < 1) {
    throw DomainError("class count must be positive");
  }
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const int label = labels[r];
    if (label < 0 || label >= num_classes) {
      throw DomainError("label " + std::to_string(label) + " at row " + std::to_string(r) +
                        " outside [0, " + std::to_string(num_classes - 1) + "]");
    }
    rows_[static_cast<std::size_t>(label)].push_back(r);
  }
  for (int k = 0; k < num_classes; ++k) {
    if (!rows_[static_cast<std::size_t>(k)].empty()) {
      nonempty_.push_back(k);
    }
  }
}

std::size_t batches_per_epoch(std::size_t n, std::size_t batch_size) {
  if (batch_size < 1) {
    throw DomainError("batch size must be >= 1");
  }
  return (n + batch_size - 1) / batch_size;
}

std::vector<IndexBatch> instance_sampler(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                                         std::uint64_t epoch) {
  if (n < 1) {
    throw DomainError("cannot sample from an empty dataset");
  }
  if (batch_size < 1) {
    throw DomainError("batch size must be >= 1");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto rng = make_rng(seed, kInstanceStream, epoch);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<IndexBatch> batches;
  batches.reserve(batches_per_epoch(n, batch_size));
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t stop = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(stop));
  }
  return batches;
}

std::vector<IndexBatch> class_balanced_sampler(const ClassIndex& index, std::size_t batches,
                                               std::size_t batch_size, std::uint64_t seed) {
  const auto& classes = index.nonempty_classes();
  if (classes.empty()) {
    throw DomainError("class-balanced sampling needs at least one non-empty class");
  }
  auto rng = make_rng(seed, kBalancedStream, 0);
  std::uniform_int_distribution<std::size_t> pick_class(0, classes.size() - 1);

  std::vector<IndexBatch> out(batches);
  for (auto& batch : out) {
    batch.reserve(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) {
      const auto& members = index.rows(classes[pick_class(rng)]);
      std::uniform_int_distribution<std::size_t> pick_row(0, members.size() - 1);
      batch.push_back(members[pick_row(rng)]);
    }
  }
  return out;
}

} // namespace lae
