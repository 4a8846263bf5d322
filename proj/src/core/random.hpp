#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

namespace siplab {

using Rng = std::mt19937_64;

// splitmix64 finalizer; decorrelates (root, stream) pairs.
std::uint64_t mix_seed(std::uint64_t root, std::uint64_t stream);

// Independent stream for one Monte Carlo row (or permutation, or pilot draw).
inline Rng make_stream(std::uint64_t root, std::uint64_t index) {
  return Rng(mix_seed(root, index));
}

// Salts separating the purposes a root seed is used for.
namespace stream {
inline constexpr std::uint64_t kRows = 0x524f5753ULL;
inline constexpr std::uint64_t kPilot = 0x50494c4fULL;
inline constexpr std::uint64_t kReference = 0x52454653ULL;
inline constexpr std::uint64_t kPermutation = 0x5045524dULL;
}  // namespace stream

double uniform01(Rng& rng);
double standard_normal(Rng& rng);

// Worker count: an explicit set_worker_count() value if nonzero, else
// SIP_LAB_THREADS when set, else the hardware thread count.
unsigned worker_count();
void set_worker_count(unsigned count);

// Runs body(i) for i in [0, n). Work is split into contiguous blocks; the
// caller writes to preassigned slots, so results do not depend on the
// number of workers.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(worker_count(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t block = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = w * block;
    const std::size_t end = std::min(n, begin + block);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] {
      for (std::size_t i = begin; i < end; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace siplab
