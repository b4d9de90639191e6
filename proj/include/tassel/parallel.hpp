#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace tassel {

/// Worker count: hardware concurrency, capped by the TASSEL_THREADS
/// environment variable when it holds a positive integer.
std::size_t worker_count();

/// Calls fn(i) for i in [0, n) on up to worker_count() threads. Work items
/// are claimed in index order; each call must write only to its own slot,
/// which keeps results identical to a sequential loop. The first exception
/// (lowest index) is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace tassel
