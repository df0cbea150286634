#pragma once

#include "acousim/random.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace acousim {

struct TaskFailure {
  std::size_t task = 0;
  std::string message;
};

template <class R>
struct TaskResults {
  std::vector<std::optional<R>> results;  // empty for failed tasks
  std::vector<TaskFailure> failures;       // ordered by task
};

/// Calls fn(task, seed) for every task in [0, n) on up to `workers` threads.
/// The seed depends only on (master_seed, task), and results land in task
/// order, so the outcome does not depend on scheduling. A throwing task is
/// recorded and the others still run.
template <class F>
auto run_parallel(std::size_t n, std::size_t workers, std::uint64_t master_seed, F&& fn)
    -> TaskResults<decltype(fn(std::size_t{}, std::uint64_t{}))> {
  using R = decltype(fn(std::size_t{}, std::uint64_t{}));
  TaskResults<R> out;
  out.results.resize(n);
  std::vector<std::optional<std::string>> errors(n);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out.results[i] = fn(i, derive_seed(master_seed, {i}));
      } catch (const std::exception& e) {
        errors[i] = e.what();
      } catch (...) {
        errors[i] = "unknown error";
      }
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) out.failures.push_back({i, *errors[i]});
  }
  return out;
}

}  // namespace acousim
