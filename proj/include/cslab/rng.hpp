#ifndef CSLAB_RNG_HPP
#define CSLAB_RNG_HPP

#include <cstdint>
#include <cmath>

namespace cslab {

// Counter-based splitmix64 stream. Cheap to fork: derived streams are
// obtained by hashing the parent seed together with arbitrary indices,
// so results are reproducible regardless of how work is scheduled.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in {0, ..., bound-1}, unbiased
  std::uint64_t next_index(std::uint64_t bound) {
    const std::uint64_t lim = std::uint64_t(-1) - std::uint64_t(-1) % bound;
    std::uint64_t v;
    do { v = next_u64(); } while (v >= lim);
    return v % bound;
  }

  // +1 or -1 with equal probability
  double next_sign() { return (next_u64() >> 63) ? -1.0 : 1.0; }

  // standard normal (polar Box-Muller, cached second value)
  double next_normal() {
    if (have_cached_) { have_cached_ = false; return cached_; }
    double u, v, r2;
    do {
      u = 2.0 * next_double() - 1.0;
      v = 2.0 * next_double() - 1.0;
      r2 = u * u + v * v;
    } while (r2 >= 1.0 || r2 == 0.0);
    const double f = std::sqrt(-2.0 * std::log(r2) / r2);
    cached_ = v * f;
    have_cached_ = true;
    return u * f;
  }

private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

// Stateless seed derivation: hash of (seed, a, b, c). Used to hand out
// independent streams per grid point / trial.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  Rng r(seed ^ 0x6a09e667f3bcc909ull);
  std::uint64_t h = r.next_u64();
  h ^= a + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  Rng r2(h);
  h = r2.next_u64();
  h ^= b + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  Rng r3(h);
  h = r3.next_u64();
  h ^= c + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  Rng r4(h);
  return r4.next_u64();
}

} // namespace cslab

#endif
