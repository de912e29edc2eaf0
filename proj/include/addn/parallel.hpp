#pragma once

#include <cstddef>
#include <functional>

namespace addn {

/// Runs body(i) for i in [0, count) on up to `threads` workers (0 = hardware
/// concurrency). Each index runs exactly once; callers write results into
/// per-index slots and reduce afterwards in index order.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body);

std::size_t resolve_threads(std::size_t requested);

}  // namespace addn
