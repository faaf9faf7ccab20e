#include "softsweep/families.hpp"

#include <algorithm>
#include <stdexcept>

namespace softsweep {

FamilyCounts::FamilyCounts(const std::vector<std::int64_t>& counts) {
  for (const std::int64_t c : counts) {
    if (c < 0) throw std::invalid_argument("FamilyCounts: negative family size");
  }
  counts_ = counts;
  rebuild(std::max<std::size_t>(16, counts_.size()));
}

void FamilyCounts::rebuild(std::size_t capacity) {
  std::size_t cap = 1;
  while (cap < capacity) cap <<= 1;
  capacity_ = cap;
  tree_.assign(capacity_ + 1, 0);
  total_ = 0;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    tree_[i + 1] += counts_[i];
    total_ += counts_[i];
  }
  for (std::size_t i = 1; i <= capacity_; ++i) {
    const std::size_t parent = i + (i & (~i + 1));
    if (parent <= capacity_) tree_[parent] += tree_[i];
  }
}

std::size_t FamilyCounts::append(std::int64_t count) {
  if (count < 0) throw std::invalid_argument("FamilyCounts: negative family size");
  counts_.push_back(0);
  if (counts_.size() > capacity_) rebuild(2 * std::max<std::size_t>(capacity_, 8));
  const std::size_t index = counts_.size() - 1;
  if (count != 0) add(index, count);
  return index;
}

void FamilyCounts::add(std::size_t i, std::int64_t delta) {
  counts_[i] += delta;
  total_ += delta;
  for (std::size_t k = i + 1; k <= capacity_; k += k & (~k + 1)) tree_[k] += delta;
}

std::size_t FamilyCounts::find(std::int64_t rank) const {
  // Largest position whose prefix sum is <= rank; the family is the next one.
  std::size_t pos = 0;
  std::int64_t remaining = rank;
  for (std::size_t step = capacity_; step > 0; step >>= 1) {
    const std::size_t next = pos + step;
    if (next <= capacity_ && tree_[next] <= remaining) {
      pos = next;
      remaining -= tree_[next];
    }
  }
  return pos;
}

std::size_t FamilyCounts::surviving() const {
  return static_cast<std::size_t>(
      std::count_if(counts_.begin(), counts_.end(), [](std::int64_t c) { return c > 0; }));
}

}  // namespace softsweep
