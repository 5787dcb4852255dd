#pragma once

// Parallel fan-out of independent replications with ordered collection.
//
// Replications run in batches of `threads`; each batch is joined and its
// results handed to `collect` in replication order. The collected output is
// therefore identical for any thread count.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

namespace qnet {

/// make(r) -> Result is called concurrently; collect(r, Result&&) serially.
template <class Make, class Collect>
void run_replications(std::size_t n_reps, std::size_t threads, Make&& make, Collect&& collect) {
  using Result = decltype(make(std::size_t{0}));
  if (threads <= 1) {
    for (std::size_t r = 0; r < n_reps; ++r) collect(r, make(r));
    return;
  }
  for (std::size_t start = 0; start < n_reps; start += threads) {
    const std::size_t count = std::min(threads, n_reps - start);
    std::vector<std::optional<Result>> out(count);
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> pool;
    pool.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      pool.emplace_back([&, i] {
        try {
          out[i].emplace(make(start + i));
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (std::size_t i = 0; i < count; ++i) {
      if (errors[i]) std::rethrow_exception(errors[i]);
      collect(start + i, std::move(*out[i]));
    }
  }
}

inline std::size_t default_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

}  // namespace qnet
