#pragma once

#include <cstddef>
#include <functional>

namespace qquant {

/// Caps the number of worker threads used by parallel_for. 0 restores the
/// hardware default.
void set_worker_limit(unsigned limit) noexcept;
unsigned worker_count() noexcept;

/// Runs body(i) for i in [0, n). Each index runs exactly once; callers write
/// results into slot i so the outcome never depends on scheduling. The first
/// exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace qquant
