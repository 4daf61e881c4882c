#pragma once

#include <cstdint>
#include <initializer_list>

namespace adsorb {

// SplitMix64: tiny, portable, identical streams on every platform. Streams for
// individual configurations are derived from (seed, path...) so workers can
// draw independently without sharing state.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits of mantissa.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

private:
  std::uint64_t state_;
};

// Derive an independent stream from a root seed and a structured path such as
// {site_index, variant}. Mixing reuses the SplitMix64 finalizer so equal paths
// map to equal streams and nearby paths decorrelate.
inline SplitMix64 derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = seed ^ 0x6a09e667f3bcc909ULL;
  for (std::uint64_t p : path) {
    h += 0x9e3779b97f4a7c15ULL + p;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
    h = h ^ (h >> 31);
  }
  return SplitMix64(h);
}

}  // namespace adsorb
