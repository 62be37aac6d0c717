#pragma once

#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace spde {

// Runs fn(i) for i in [0, n) across `workers` threads with a strided
// partition. Callers write results into per-index slots and reduce in index
// order afterwards, which keeps every aggregate independent of the worker
// count. The first exception wins and is rethrown on the calling thread.
inline void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int nw = std::min(workers, n);
  std::vector<std::thread> pool;
  pool.reserve(nw);
  std::exception_ptr err;
  std::mutex err_mu;
  for (int w = 0; w < nw; ++w) {
    pool.emplace_back([&, w]() {
      for (int i = w; i < n; i += nw) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!err) err = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace spde
