#pragma once

#include "qbgraph/types.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qbgraph {

/// Calls fn(i) for every i in [0, count) on up to `workers` threads, handing
/// out indices dynamically. Once a call throws, no new indices are started;
/// after all threads join, the exception from the lowest failing index is
/// rethrown. `done`, if given, is incremented after each completed call.
template <class Fn>
void parallel_for(Index count, unsigned workers, Fn&& fn, std::atomic<Index>* done = nullptr) {
  if (count <= 0) return;
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  std::atomic<Index> next{0};
  std::atomic<bool> stop{false};
  std::mutex mutex;
  Index failed_index = count;
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      if (stop.load(std::memory_order_relaxed)) return;
      const Index i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
        if (done) done->fetch_add(1);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
        stop = true;
      }
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace qbgraph
