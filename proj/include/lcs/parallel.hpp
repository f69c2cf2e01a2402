#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace lcs {

/// Runs fn(i) for i in [0, n).  Results must go to pre-indexed slots so
/// the output is identical for any worker count.
template <class Fn>
void parallel_for(std::size_t n, int threads, const Fn& fn) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  constexpr std::size_t chunk = 8;
  auto worker = [&] {
    for (;;) {
      const std::size_t begin = next.fetch_add(chunk);
      if (begin >= n) return;
      const std::size_t end = std::min(begin + chunk, n);
      for (std::size_t i = begin; i < end; ++i) fn(i);
    }
  };
  std::vector<std::thread> pool;
  const int nw = std::min<int>(threads, static_cast<int>(n));
  pool.reserve(nw);
  for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

inline int default_threads() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace lcs
