#include "equidecomp/util.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace eqd {

namespace {
int g_threads = 0;

int resolve_threads() {
  if (g_threads > 0) return g_threads;
  if (const char* env = std::getenv("EQUIDECOMP_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}
}  // namespace

int thread_count() { return resolve_threads(); }
void set_thread_count(int n) { g_threads = n; }

void parallel_shards(std::size_t n, const std::function<void(int, std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  int shards = kShardCount;
  if (static_cast<std::size_t>(shards) > n) shards = static_cast<int>(n);
  std::size_t chunk = (n + shards - 1) / shards;

  int workers = resolve_threads();
  if (workers <= 1 || shards == 1) {
    for (int s = 0; s < shards; ++s) {
      std::size_t b = s * chunk, e = std::min(n, b + chunk);
      if (b < e) fn(s, b, e);
    }
    return;
  }

  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      int s = next.fetch_add(1);
      if (s >= shards) return;
      std::size_t b = s * chunk, e = std::min(n, b + chunk);
      if (b < e) fn(s, b, e);
    }
  };
  std::vector<std::thread> pool;
  int spawn = std::min(workers, shards);
  pool.reserve(spawn);
  for (int i = 0; i < spawn; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

Rng::Rng(std::uint64_t seed) {
  std::uint64_t s = seed;
  std::seed_seq seq{splitmix64(s), splitmix64(s), splitmix64(s), splitmix64(s)};
  eng_.seed(seq);
}

Rng::Rng(std::uint64_t seed, const std::string& purpose) : Rng(seed ^ fnv1a(purpose)) {}

std::uint64_t Rng::next_u64() { return eng_(); }

double Rng::uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection sampling keeps the distribution exactly uniform.
  std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = eng_();
  } while (x >= limit);
  return x % n;
}

double Rng::gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1, u2;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 6.283185307179586476925286766559 * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

}  // namespace eqd
