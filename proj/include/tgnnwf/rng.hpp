#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace tgnnwf {

// Deterministic 64-bit generator (splitmix64). All sampling transforms are
// spelled out explicitly so streams are identical across platforms and
// standard-library versions; every consumer takes an explicit seed.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform in [-1, 1).
  double uniform_sym() { return 2.0 * uniform01() - 1.0; }

  // Uniform integer in [0, n). Multiply-shift bound; slight modulo-free bias
  // of < 2^-64, irrelevant at the sample counts used here.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Standard normal via Box-Muller (one value per call; the pair's second
  // member is discarded to keep the stream layout simple).
  double normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Fisher-Yates permutation of 0..n-1.
  std::vector<int> permutation(int n) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(below(static_cast<std::uint64_t>(i) + 1));
      std::swap(p[i], p[j]);
    }
    return p;
  }

  // First k entries of a random permutation (sampling without replacement).
  std::vector<int> sample_without_replacement(int n, int k) {
    std::vector<int> p = permutation(n);
    p.resize(k);
    return p;
  }

private:
  std::uint64_t state_;
};

}  // namespace tgnnwf
