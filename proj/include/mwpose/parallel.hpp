#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace mwpose {

// Work is always split into fixed-size chunks so the decomposition (and any
// chunk-ordered merge the caller performs) is independent of the thread
// count. Only the assignment of chunks to threads varies.
inline constexpr std::size_t kParallelChunk = std::size_t{1} << 16;

inline int effective_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

inline std::size_t chunk_count(std::size_t n) { return (n + kParallelChunk - 1) / kParallelChunk; }

// Calls fn(chunk_index, begin, end) for every chunk of [0, n). Chunks run on
// up to `threads` workers (<= 1 runs inline). fn must only write to
// chunk-indexed slots; merging those slots in chunk order is the caller's job
// and is what keeps results byte-identical across thread counts.
template <class Fn>
void parallel_chunks(std::size_t n, int threads, Fn&& fn) {
  const std::size_t chunks = chunk_count(n);
  if (chunks == 0) return;
  threads = effective_threads(threads);
  if (threads <= 1 || chunks == 1) {
    for (std::size_t c = 0; c < chunks; ++c)
      fn(c, c * kParallelChunk, std::min(n, (c + 1) * kParallelChunk));
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1, std::memory_order_relaxed);
      if (c >= chunks) return;
      fn(c, c * kParallelChunk, std::min(n, (c + 1) * kParallelChunk));
    }
  };
  std::vector<std::thread> pool;
  const std::size_t nworkers = std::min<std::size_t>(threads, chunks);
  pool.reserve(nworkers);
  for (std::size_t t = 0; t < nworkers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

}  // namespace mwpose
