#pragma once

#include <cstddef>
#include <functional>

namespace spatialmc {

// Applies chunk_fn to disjoint contiguous chunks of [0, n). Chunk boundaries
// depend only on n and the thread count, never on scheduling; callers must
// write disjoint output ranges.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t begin, std::size_t end)>& chunk_fn);

// Hardware concurrency clamped to a sane minimum of 1.
int default_thread_count();

}  // namespace spatialmc
