#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace basinlab {

/// fn(i) for i in [0, count) over a pool of `workers` threads. Work items
/// must be independent; fn must not let exceptions escape.
inline void parallel_for(long count, int workers, const std::function<void(long)>& fn) {
  if (workers <= 1 || count < 2) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  auto drain = [&] {
    for (long i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
  };
  std::vector<std::thread> pool;
  const long spawn = std::min<long>(workers, count);
  pool.reserve(static_cast<size_t>(spawn));
  for (long w = 0; w < spawn; ++w) pool.emplace_back(drain);
  for (auto& t : pool) t.join();
}

}  // namespace basinlab
