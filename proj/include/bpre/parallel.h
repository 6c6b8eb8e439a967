#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "bpre/rng.h"

namespace bpre {

// Runs fn(i) for i in [0, count) on up to worker_count() threads.  Callers write
// results into slot i and reduce in index order, so output never depends on scheduling.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  auto workers = static_cast<std::size_t>(worker_count());
  if (workers <= 1 or count <= 1) {
    for (auto i = std::size_t{0}; i < count; ++i) { fn(i); }
    return;
  }
  auto next = std::atomic<std::size_t>{0};
  auto first_error = std::exception_ptr{};
  auto error_mutex = std::mutex{};
  auto body = [&] {
    for (auto i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        auto lock = std::lock_guard{error_mutex};
        if (not first_error) { first_error = std::current_exception(); }
        next = count;
      }
    }
  };
  auto threads = std::vector<std::thread>{};
  for (auto t = std::size_t{0}; t < std::min(workers, count); ++t) { threads.emplace_back(body); }
  for (auto& t : threads) { t.join(); }
  if (first_error) { std::rethrow_exception(first_error); }
}

}  // namespace bpre
