#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <type_traits>
#include <vector>

namespace sbs {

/// Evaluates fn(0..count-1) on up to `jobs` threads and returns the results in
/// index order, so the outcome does not depend on scheduling.
template <class Fn>
auto parallel_map(std::size_t count, std::size_t jobs, Fn&& fn) -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
  using Result = std::invoke_result_t<Fn&, std::size_t>;
  std::vector<std::optional<Result>> slots(count);
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));

  if (jobs == 1) {
    for (std::size_t r = 0; r < count; ++r) slots[r].emplace(fn(r));
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      for (std::size_t r = next++; r < count; r = next++) {
        try {
          slots[r].emplace(fn(r));
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    };
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < jobs; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<Result> out;
  out.reserve(count);
  for (auto& slot : slots) out.push_back(std::move(*slot));
  return out;
}

}  // namespace sbs
