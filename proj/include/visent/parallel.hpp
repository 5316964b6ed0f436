#pragma once

#include <cstdint>
#include <functional>

namespace visent {

// Runs fn(0..n-1) on up to `threads` workers pulling indices from a shared
// counter. Callers write results into index-addressed slots, so output is
// independent of scheduling. If any call throws, the exception for the
// lowest failing index is rethrown after all workers join.
void parallel_for(std::int64_t n, int threads, const std::function<void(std::int64_t)>& fn);

}  // namespace visent
