// Deterministic task parallelism: tasks are indexed, each task derives its own
// RNG substream from the index, and results land in index-addressed slots, so
// the outcome is independent of the worker count.

#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace qds {

inline unsigned default_thread_count() {
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Runs fn(task_index) for task_index in [0, count) across `threads` workers.
// fn must only write to state owned by its task index.
inline void parallel_for(size_t count, unsigned threads,
                         const std::function<void(size_t)>& fn) {
  if (count == 0) return;
  if (threads <= 1 || count == 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  if (threads > count) threads = static_cast<unsigned>(count);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (size_t i = w; i < count; i += threads) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace qds
