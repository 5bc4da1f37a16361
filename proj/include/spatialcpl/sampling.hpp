#pragma once

// Randomized assignment kernels, parameterized on the source of uniform
// integers. A `draw` is any callable returning a value in [0, bound) for
// draw(bound); Rng satisfies this, and tests substitute exhaustive draw
// sequences to enumerate the exact output distribution.

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spatialcpl/error.hpp"

namespace spatialcpl {

// Uniform random size-constrained assignment. `members` are the items to
// place; `sizes[k]` is the number of items cell k receives. When `pinned`
// is nonempty, members[k] for k < sizes.size() is fixed in cell k (callers
// pass members ordered so that the pinned ones come first). Returns the cell
// label of each member. The free members are Fisher-Yates shuffled, then
// dealt into the residual slots in cell order.
template <class Draw>
std::vector<std::size_t> shuffle_assign(std::size_t member_count, std::span<const std::size_t> sizes, bool pinned,
                                        Draw&& draw) {
  std::size_t total = 0;
  for (std::size_t s : sizes) total += s;
  if (total != member_count)
    fail(ErrorKind::Argument, "cell sizes sum to " + std::to_string(total) + " but there are " +
                                  std::to_string(member_count) + " members");
  const std::size_t fixed = pinned ? sizes.size() : 0;
  if (pinned)
    for (std::size_t s : sizes)
      if (s == 0) fail(ErrorKind::Argument, "a pinned cell needs size >= 1");

  std::vector<std::size_t> labels(member_count);
  for (std::size_t k = 0; k < fixed; ++k) labels[k] = k;

  // Slot sequence for the free members: residual sizes in cell order.
  std::vector<std::size_t> slots;
  slots.reserve(member_count - fixed);
  for (std::size_t k = 0; k < sizes.size(); ++k)
    for (std::size_t j = pinned ? 1 : 0; j < sizes[k]; ++j) slots.push_back(k);

  // Shuffling the slot labels over the free members in place is the same
  // uniform distribution as shuffling members over fixed slots.
  for (std::size_t i = slots.size(); i > 1; --i) {
    const std::size_t j = draw(i);
    std::swap(slots[i - 1], slots[j]);
  }
  for (std::size_t i = 0; i < slots.size(); ++i) labels[fixed + i] = slots[i];
  return labels;
}

// Cell labels of the first `leading` members under a uniform size-constrained
// assignment, drawn sequentially: each member takes cell k with probability
// remaining_k / remaining_total. Same joint law as the first `leading`
// entries of shuffle_assign(..., pinned=false, ...). `remaining` is scratch
// space of length sizes.size().
template <class Draw>
void sample_leading_labels(std::span<const std::size_t> sizes, std::size_t leading, Draw&& draw,
                           std::span<std::size_t> remaining, std::span<std::size_t> out) {
  std::size_t total = 0;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    remaining[k] = sizes[k];
    total += sizes[k];
  }
  for (std::size_t i = 0; i < leading; ++i) {
    std::size_t u = draw(total);
    std::size_t k = 0;
    while (u >= remaining[k]) {
      u -= remaining[k];
      ++k;
    }
    out[i] = k;
    --remaining[k];
    --total;
  }
}

// Number of distinct values in `labels`; `seen` is scratch with one slot per
// possible label, all zero on entry and restored to zero on exit.
inline std::size_t count_distinct(std::span<const std::size_t> labels, std::span<unsigned char> seen) {
  std::size_t distinct = 0;
  for (std::size_t l : labels) {
    if (!seen[l]) {
      seen[l] = 1;
      ++distinct;
    }
  }
  for (std::size_t l : labels) seen[l] = 0;
  return distinct;
}

}  // namespace spatialcpl
