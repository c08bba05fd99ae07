#ifndef STEINREC_PARALLEL_HPP
#define STEINREC_PARALLEL_HPP

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace steinrec {

int default_worker_count();

// Runs fn(i) for i in [0, count) on up to `workers` threads (0 = default).
// Items must be independent; completion order is unspecified, so callers
// write results into preallocated slots keyed by i.
void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& fn);

// Combines partial results over [lo, hi) with a tree whose shape depends only
// on the block count. Serial and parallel producers therefore reduce to
// bit-identical totals.
template <typename T>
T pairwise_combine(std::vector<T>& parts, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return std::move(parts[lo]);
  const std::size_t mid = lo + (hi - lo) / 2;
  T left = pairwise_combine(parts, lo, mid);
  T right = pairwise_combine(parts, mid, hi);
  left += right;
  return left;
}

}  // namespace steinrec

#endif
