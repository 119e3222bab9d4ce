#pragma once

#include <cstdint>
#include <random>

namespace roughvol {

// SplitMix64 finalizer. Used to turn (seed, stream, path) counters into
// well-separated engine seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives a child seed; used for per-maturity seeds and auxiliary streams.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept
{
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

enum class Stream : std::uint64_t {
  volatility = 0,  // drives (W, W^H)
  orthogonal = 1,  // independent Brownian B of the price equation
};

/// Normal generator for one path of one stream. Depends only on
/// (seed, stream, path), so path i is the same whatever the batch layout.
class PathNormals {
public:
  PathNormals(std::uint64_t seed, Stream stream, std::uint64_t path)
      : engine_(derive_seed(derive_seed(seed, static_cast<std::uint64_t>(stream)), path))
  {
  }

  double operator()() { return normal_(engine_); }

private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace roughvol
