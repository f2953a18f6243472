#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dvlab {

/// Reproducible randomness handle. Every sampler takes one of these; the same
/// (master, stream) pair always yields the same sequence.
struct Seed {
  std::uint64_t master = 0;
  std::uint64_t stream = 0;

  friend bool operator==(const Seed&, const Seed&) = default;
};

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : s) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// Child stream for trial `index` of `section`:
/// stream' = splitmix(splitmix(stream ^ fnv1a(section)) + index).
constexpr Seed derive(Seed parent, std::string_view section, std::uint64_t index = 0) {
  std::uint64_t s = detail::splitmix64(parent.stream ^ detail::fnv1a(section));
  s = detail::splitmix64(s + index);
  return Seed{parent.master, s};
}

constexpr Seed derive(Seed parent, std::uint64_t index) {
  return Seed{parent.master, detail::splitmix64(parent.stream + detail::splitmix64(index))};
}

using Engine = std::mt19937_64;

inline Engine make_engine(Seed seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed.master), static_cast<std::uint32_t>(seed.master >> 32),
                    static_cast<std::uint32_t>(seed.stream), static_cast<std::uint32_t>(seed.stream >> 32)};
  return Engine(seq);
}

}  // namespace dvlab
