#include "wgf/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace wgf {

namespace {
constexpr std::size_t kMinChunk = 4096;
constexpr std::size_t kMaxChunks = 64;
}  // namespace

unsigned worker_count() {
  if (const char* env = std::getenv("WGF_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::size_t chunk_count(std::size_t n) {
  return std::clamp<std::size_t>((n + kMinChunk - 1) / kMinChunk, 1, kMaxChunks);
}

void for_chunks(std::size_t n, const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
  const std::size_t chunks = chunk_count(n);
  auto range = [&](std::size_t c) {
    return std::pair<std::size_t, std::size_t>{n * c / chunks, n * (c + 1) / chunks};
  };
  const unsigned workers = std::min<unsigned>(worker_count(), static_cast<unsigned>(chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) {
      const auto [b, e] = range(c);
      body(c, b, e);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t c; (c = next.fetch_add(1)) < chunks;) {
        try {
          const auto [b, e] = range(c);
          body(c, b, e);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace wgf
