#pragma once

#include <cstddef>
#include <functional>

namespace erpm {

// Process-wide parallelism degree used by the bulk pixel loops. Defaults to 1.
void set_parallelism(int jobs);
int parallelism();

// Calls fn(k) for every k in [0, n). Work is split into contiguous chunks
// over at most parallelism() threads; callers must only write state owned by
// index k, which makes results independent of the schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace erpm
