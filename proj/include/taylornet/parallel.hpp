#pragma once

#include <functional>

namespace taylornet {

// Runs body(i) for i in [0, n) on up to `threads` workers. Bodies write to
// disjoint preallocated slots, so results never depend on the thread count.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

}  // namespace taylornet
