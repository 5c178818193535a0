// Copyright the purcellkit authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef PURCELLKIT_PARALLEL_HPP
#define PURCELLKIT_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace purcellkit::detail
{

// Runs fn(i) for i in [0, n) across hardware threads. Each index is written by exactly one
// worker, so results gathered by index are independent of scheduling. The first exception
// thrown by any worker is rethrown on the calling thread.
template <typename Fn>
void ParallelFor(std::size_t n, Fn &&fn)
{
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(hw, n / 64 + 1);
  if (workers <= 1)
  {
    for (std::size_t i = 0; i < n; ++i)
    {
      fn(i);
    }
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
  {
    pool.emplace_back(
        [&, w]
        {
          try
          {
            for (std::size_t i = w; i < n; i += workers)
            {
              fn(i);
            }
          }
          catch (...)
          {
            std::lock_guard lock(error_mutex);
            if (!error)
            {
              error = std::current_exception();
            }
          }
        });
  }
  for (auto &t : pool)
  {
    t.join();
  }
  if (error)
  {
    std::rethrow_exception(error);
  }
}

}  // namespace purcellkit::detail

#endif  // PURCELLKIT_PARALLEL_HPP
