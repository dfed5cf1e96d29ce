#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace eqd {

// Worker count used by parallel_shards. 0 means "hardware concurrency".
// Resolution order: explicit set_thread_count, EQUIDECOMP_THREADS, hardware.
int thread_count();
void set_thread_count(int n);

// Splits [0, n) into a fixed number of shards (independent of the worker
// count), runs fn(shard_index, begin, end) across workers, and returns only
// after all shards finish.  Callers that reduce must combine per-shard
// results in shard order so the outcome is identical for any worker count.
inline constexpr int kShardCount = 64;
void parallel_shards(std::size_t n, const std::function<void(int, std::size_t, std::size_t)>& fn);

// Deterministic RNG: mt19937_64 with splitmix-style seed scrambling and
// portable double/Gaussian generation (libstdc++ distributions are not
// pinned across implementations).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  // Independent stream for a named purpose under one user-facing seed.
  Rng(std::uint64_t seed, const std::string& purpose);

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi);
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  // Standard Gaussian via Box-Muller.
  double gaussian();

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

class Stopwatch {
 public:
  Stopwatch() : start_(clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(clock::now() - start_).count();
  }

 private:
  using clock = std::chrono::steady_clock;
  clock::time_point start_;
};

}  // namespace eqd
