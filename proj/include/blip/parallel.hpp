#pragma once

#include <cstddef>
#include <functional>

namespace blip {

// Global cap on worker threads. 0 restores the hardware default.
void set_num_threads(std::size_t n);
std::size_t num_threads();

// Splits [0, n) into contiguous chunks and runs body(begin, end) on each.
// Every index is visited exactly once; bodies must only write to state owned
// by their own index range so results do not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace blip
