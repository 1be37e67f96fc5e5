#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qsv {

namespace detail {
inline std::atomic<unsigned>& worker_override() {
  static std::atomic<unsigned> value{0};
  return value;
}
}  // namespace detail

/// Forces the worker count; 0 restores the default.
inline void set_worker_count(unsigned n) { detail::worker_override() = n; }

/// Worker threads for parallel loops: the set_worker_count value, else
/// QSV_THREADS if set, else the hardware concurrency.
inline unsigned worker_count() {
  if (const unsigned forced = detail::worker_override()) return forced;
  static const unsigned count = [] {
    if (const char* env = std::getenv("QSV_THREADS")) {
      const long v = std::strtol(env, nullptr, 10);
      if (v >= 1) return static_cast<unsigned>(v);
    }
    return std::max(1U, std::thread::hardware_concurrency());
  }();
  return count;
}

/// Calls body(i) for every i in [0, count). Work items must write only to
/// their own slots, so results do not depend on scheduling. If items throw,
/// the exception of the lowest index is rethrown after all workers stop.
template <typename Body>
void parallel_for(std::size_t count, Body&& body) {
  const std::size_t threads = std::min<std::size_t>(worker_count(), count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mutex;
  std::exception_ptr error;
  std::size_t error_index = count;
  const auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        const std::lock_guard lock(mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(threads - 1);
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace qsv
