#ifndef SOFTSWEEP_FAMILIES_HPP
#define SOFTSWEEP_FAMILIES_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

namespace softsweep {

/// Append-only list of family sizes backed by a Fenwick (prefix-sum) tree.
/// Slots are never removed: a family that dies keeps its index with count 0,
/// so birth order is preserved. Selection proportional to size and single
/// count updates are O(log F).
class FamilyCounts {
 public:
  FamilyCounts() = default;
  explicit FamilyCounts(const std::vector<std::int64_t>& counts);

  std::size_t size() const { return counts_.size(); }
  bool empty() const { return counts_.empty(); }
  std::int64_t total() const { return total_; }
  std::int64_t operator[](std::size_t i) const { return counts_[i]; }
  const std::vector<std::int64_t>& counts() const { return counts_; }

  /// Appends a family of the given initial size and returns its index.
  std::size_t append(std::int64_t count);

  /// Adds delta to family i. The result must stay nonnegative.
  void add(std::size_t i, std::int64_t delta);

  /// Index of the family containing individual `rank` when individuals are
  /// enumerated family by family in birth order; rank in [0, total()).
  std::size_t find(std::int64_t rank) const;

  std::size_t surviving() const;

 private:
  void rebuild(std::size_t capacity);

  std::vector<std::int64_t> counts_;
  std::vector<std::int64_t> tree_;  // 1-based Fenwick array, size capacity + 1
  std::size_t capacity_ = 0;
  std::int64_t total_ = 0;
};

}  // namespace softsweep

#endif  // SOFTSWEEP_FAMILIES_HPP
