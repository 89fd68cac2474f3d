#pragma once

#include <cstddef>
#include <functional>

namespace mrseg::par {

/// Caps the number of worker threads used by parallel loops.
/// n <= 0 restores the hardware default.
void set_thread_cap(int n);
int thread_cap();

/// Runs fn over [0, n) split into fixed-size chunks. Chunk boundaries depend
/// only on n and chunk, never on the thread count, so index-keyed writes are
/// reproducible for any cap. Exceptions thrown by fn are rethrown.
void parallel_chunks(std::size_t n, std::size_t chunk,
                     const std::function<void(std::size_t begin, std::size_t end)>& fn);

}  // namespace mrseg::par
