#pragma once

// Minimal worker pool shared by the refiner and the session simulator.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace navstruct {

/// Worker count from NAVSTRUCT_THREADS, defaulting to one.
inline std::size_t default_thread_count() {
  if (const char* env = std::getenv("NAVSTRUCT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return 1;
}

/// Runs f(0..count-1) on up to `threads` workers. Indices are claimed
/// dynamically; the first exception is rethrown after all workers join.
template <class F>
void parallel_for(std::size_t count, std::size_t threads, F&& f) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t k = 0; k < count; ++k) f(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  for (std::size_t w = 0; w < std::min(threads, count); ++w)
    pool.emplace_back([&] {
      for (std::size_t k; (k = next.fetch_add(1)) < count;) {
        try {
          f(k);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace navstruct
