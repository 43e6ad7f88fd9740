#pragma once

#include <cstddef>
#include <functional>

namespace spe {

/// Runs fn(0..count-1) across up to `threads` workers (serial when
/// threads <= 1). Tasks must write only to their own slots; the first
/// exception thrown by any task is rethrown after all workers join, so
/// aggregation order stays deterministic regardless of scheduling.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

int default_thread_count();

}  // namespace spe
