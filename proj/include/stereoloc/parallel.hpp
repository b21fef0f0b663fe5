#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace stereoloc {

/// Runs fn(i) for i in [begin, end) over at most num_threads workers using a
/// static block partition. Iterations must write disjoint state; results are
/// then independent of the worker count.
inline void parallelFor(int begin, int end, int num_threads,
                        const std::function<void(int)>& fn) {
  const int count = end - begin;
  if (count <= 0) return;
  num_threads = std::min(num_threads, count);
  if (num_threads <= 1) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(num_threads));
  const int chunk = (count + num_threads - 1) / num_threads;
  for (int t = 0; t < num_threads; ++t) {
    const int lo = begin + t * chunk;
    const int hi = std::min(lo + chunk, end);
    if (lo >= hi) break;
    workers.emplace_back([lo, hi, &fn] {
      for (int i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& w : workers) w.join();
}

}  // namespace stereoloc
