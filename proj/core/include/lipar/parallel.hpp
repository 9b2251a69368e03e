#pragma once

#include <cstddef>
#include <functional>

namespace lipar {

/// Worker cap for parallel loops; 1 (the default) runs inline.
void set_worker_threads(int n);
int worker_threads();

/// Calls fn(i) for i in [0, n). Iterations must be independent; each writes
/// only its own output slot, so results do not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace lipar
