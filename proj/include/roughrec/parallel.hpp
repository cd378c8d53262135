#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace roughrec {

inline constexpr const char* kWorkersEnv = "ROUGHREC_WORKERS";

/// Worker count from ROUGHREC_WORKERS, else the hardware concurrency.
inline int worker_count() {
  if (const char* env = std::getenv(kWorkersEnv)) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// results[i] = fn(i) for i in [0, n). Output order is the index order, so the
/// result does not depend on scheduling. The first exception (lowest index)
/// is rethrown after all workers finish.
template <typename Fn>
auto parallel_map(int n, Fn fn, int workers = worker_count()) {
  using Result = decltype(fn(0));
  std::vector<Result> results(static_cast<std::size_t>(std::max(n, 0)));
  std::vector<std::exception_ptr> errors(results.size());
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        results[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::clamp(workers, 1, std::max(n, 1));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

}  // namespace roughrec
