#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace tncap {

/// Worker count from TN_CAPACITY_THREADS (unset or 0 means hardware concurrency).
inline std::size_t worker_count() {
  std::size_t n = 0;
  if (const char* env = std::getenv("TN_CAPACITY_THREADS")) {
    try {
      n = static_cast<std::size_t>(std::stoul(env));
    } catch (...) {
      n = 0;
    }
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

/// Runs body(i) for i in [0, count) over at most `workers` threads. Each index
/// runs exactly once; the first exception (lowest index) is rethrown.
template <typename Body>
void parallel_for(std::size_t count, std::size_t workers, Body&& body) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace tncap
