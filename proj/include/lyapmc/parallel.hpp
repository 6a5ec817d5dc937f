// Deterministic task fan-out: tasks are indexed 0..n-1, workers pull the
// next index atomically, results land in a slot per task. Scheduling order
// is free; the caller folds the slots in index order, so the numbers cannot
// depend on the worker count.
#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "lyapmc/common.hpp"

namespace lyapmc {

inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

template <class Result, class Fn>
std::vector<Result> run_indexed_tasks(i64 n_tasks, int workers, Fn&& fn) {
  std::vector<Result> out(static_cast<std::size_t>(n_tasks));
  if (n_tasks == 0) return out;
  workers = resolve_workers(workers);

  if (workers <= 1 || n_tasks == 1) {
    for (i64 i = 0; i < n_tasks; ++i) out[static_cast<std::size_t>(i)] = fn(i);
    return out;
  }

  std::atomic<i64> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;

  auto body = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const i64 i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n_tasks) return;
      try {
        out[static_cast<std::size_t>(i)] = fn(i);
      } catch (...) {
        {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
        }
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  const int spawn = static_cast<int>(std::min<i64>(workers, n_tasks));
  pool.reserve(static_cast<std::size_t>(spawn));
  for (int w = 0; w < spawn; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace lyapmc
