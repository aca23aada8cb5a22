#pragma once

#include <cstddef>
#include <functional>

namespace twophase {

void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs body(begin, end) over a static partition of [0, n). Each index is
/// visited exactly once; callers write only to per-index slots so results
/// do not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace twophase
