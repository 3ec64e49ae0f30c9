#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace idpr {

// splitmix64: cheap, well-mixed 64-bit generator used wherever we need
// reproducible streams that are independent of thread schedule.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  // Uniform integer in [0, n); n must be positive.
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  int uniform_int(int lo, int hi_inclusive) {
    return lo + static_cast<int>(
                    next_below(static_cast<std::uint64_t>(hi_inclusive) - lo + 1));
  }

  // Standard normal via Box-Muller (one value per call, cached pair dropped
  // to keep the stream position easy to reason about).
  double normal() {
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 1e-300) u1 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

private:
  std::uint64_t state_;
};

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Derive an independent stream from a base seed and a label (e.g. an
// instance id or a directed-edge index) so parallel schedules cannot
// change what each unit of work sees.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  return seed ^ fnv1a(label);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  Rng mix(seed ^ (salt * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
  return mix.next_u64();
}

}  // namespace idpr
