#pragma once

#include <cstddef>
#include <functional>

namespace uca {

// Worker count from UCA_THREADS: unset -> hardware concurrency, 0 or 1 ->
// serial.
int worker_count();

// Calls body(i) for every i in [0, count), split into contiguous ranges over
// up to worker_count() threads. The first exception thrown is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace uca
