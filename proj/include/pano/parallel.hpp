#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace pano {

// Global worker cap for all parallel loops (CLI --threads).
int thread_count();
void set_thread_count(int n);

// Static block partition of [begin, end); each worker owns a disjoint
// contiguous range, so outputs are deterministic regardless of schedule.
void parallel_for(int begin, int end, const std::function<void(int)>& body);

}  // namespace pano
