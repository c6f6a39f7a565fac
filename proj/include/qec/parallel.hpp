#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qec::parallel {

namespace detail {
inline std::atomic<int>& worker_count_storage() {
  static std::atomic<int> count{0};  // 0 = use hardware concurrency
  return count;
}
}  // namespace detail

/// Sets the number of worker threads used by parallel loops; 0 restores the
/// hardware default. Results are identical for every setting.
inline void set_worker_count(int n) { detail::worker_count_storage().store(n < 0 ? 0 : n); }

inline int worker_count() {
  const int configured = detail::worker_count_storage().load();
  if (configured > 0) return configured;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(state, i) for i in [0, n), where each worker owns one state
/// produced by make_state(). Work is claimed dynamically per index; callers
/// must write results into per-index slots and reduce in index order
/// afterwards, so the outcome does not depend on the worker count.
template <class StateFactory, class Fn>
void parallel_for_stateful(std::size_t n, StateFactory&& make_state, Fn&& fn) {
  if (n == 0) return;
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(worker_count()), n);
  if (workers <= 1) {
    auto state = make_state();
    for (std::size_t i = 0; i < n; ++i) fn(state, i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    try {
      auto state = make_state();
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(state, i);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
      next.store(n);  // stop handing out work
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Stateless convenience wrapper around parallel_for_stateful.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  struct NoState {};
  parallel_for_stateful(
      n, [] { return NoState{}; }, [&](NoState&, std::size_t i) { fn(i); });
}

}  // namespace qec::parallel
