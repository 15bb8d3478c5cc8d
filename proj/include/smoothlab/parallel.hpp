#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace smoothlab {

/// Worker cap used by every parallel loop; 0 means hardware concurrency.
void set_thread_count(unsigned threads) noexcept;
unsigned thread_count() noexcept;

/// Calls body(i) for i in [0, n). Work is split into contiguous chunks; the
/// body must only write to per-index state.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Pairwise summation; the association order depends only on the length.
double pairwise_sum(std::span<const double> values) noexcept;

}  // namespace smoothlab
