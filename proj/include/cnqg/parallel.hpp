#pragma once

#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

namespace cnqg {

// Worker count: CNQG_THREADS caps it, hardware concurrency is the default.
inline int thread_count() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char *env = std::getenv("CNQG_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1 && static_cast<unsigned>(cap) < hw)
      hw = static_cast<unsigned>(cap);
  }
  return static_cast<int>(hw);
}

// Static block partition of [0, n); body(begin, end) per worker.
template <typename Body>
void parallel_for(std::int64_t n, Body body) {
  const int workers = thread_count();
  if (workers <= 1 || n < 256) {
    body(static_cast<std::int64_t>(0), n);
    return;
  }
  std::vector<std::thread> pool;
  const std::int64_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::int64_t begin = w * chunk;
    const std::int64_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto &t : pool) t.join();
}

}  // namespace cnqg
