#pragma once

#include <cstddef>
#include <functional>

namespace metaradon {

// Worker count used by every parallel loop in the library. 0 selects
// std::thread::hardware_concurrency().
void set_thread_count(int n);
int thread_count();

// Runs body(i) for i in [0, n). Each index must write only its own output
// slice; the partition never affects results. Calls made from inside a
// worker run serially.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace metaradon
