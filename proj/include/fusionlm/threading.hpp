#pragma once

#include <cstddef>
#include <functional>

namespace fusionlm {

// Caps the number of worker threads used by parallel_for. 0 picks the
// hardware concurrency. Numeric results never depend on this value.
void set_thread_count(std::size_t n);
std::size_t thread_count();

// Runs fn(lo, hi) over disjoint chunks of [0, n). Chunk boundaries depend
// only on n and grain, so any output written per-index is bit-identical
// regardless of how many threads execute. Not reentrant.
void parallel_for(std::size_t n, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace fusionlm
