#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace dioph {

/// Runs f(0), ..., f(n_blocks - 1) on up to `threads` workers and returns
/// the results indexed by block. Callers reduce the vector in index order,
/// which makes the outcome independent of the thread count. If blocks
/// throw, the exception of the lowest-numbered failing block is rethrown.
template <class F>
auto run_blocks(std::size_t n_blocks, unsigned threads, F&& f) {
  using Result = decltype(f(std::size_t{}));
  std::vector<Result> results(n_blocks);
  std::vector<std::exception_ptr> errors(n_blocks);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n_blocks, 1)));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n_blocks; i = next++) {
      try {
        results[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

/// Splits [lo, hi] into at most `pieces` contiguous ranges of near-equal size.
struct Range {
  long lo = 0;
  long hi = -1;
};

inline std::vector<Range> split_range(long lo, long hi, std::size_t pieces) {
  std::vector<Range> out;
  if (hi < lo || pieces == 0) return out;
  long n = hi - lo + 1;
  long k = static_cast<long>(std::min<std::size_t>(pieces, static_cast<std::size_t>(n)));
  for (long i = 0; i < k; ++i) {
    long a = lo + n * i / k;
    long b = lo + n * (i + 1) / k - 1;
    out.push_back({a, b});
  }
  return out;
}

}  // namespace dioph
