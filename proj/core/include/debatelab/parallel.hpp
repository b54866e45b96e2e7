#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace debatelab {

// Calls fn(i) for every i in [0, count) using at most `workers` threads.
// All indices run even if some throw; afterwards the exception from the
// lowest failing index is rethrown.
template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  if (count == 0) return;
  const auto threads = static_cast<std::size_t>(std::clamp<long long>(workers, 1, count));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace debatelab
