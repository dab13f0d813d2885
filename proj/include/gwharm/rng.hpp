#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace gwharm {

/// SplitMix64 finalizer; used as the hash behind every derived stream.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stream key of child `index` (0-based) of the vertex whose key is `parent`.
/// Chaining this from a root key hashes the vertex's whole word.
constexpr std::uint64_t child_salt(std::uint32_t index) noexcept {
  return mix64(0xd1b54a32d192ed03ULL * (std::uint64_t{index} + 1));
}

inline constexpr auto kChildSalts = [] {
  std::array<std::uint64_t, 64> a{};
  for (std::uint32_t i = 0; i < a.size(); ++i) a[i] = child_salt(i);
  return a;
}();

constexpr std::uint64_t child_key(std::uint64_t parent, std::uint32_t index) noexcept {
  return mix64(parent ^ (index < kChildSalts.size() ? kChildSalts[index] : child_salt(index)));
}

/// Independent seed for replica `index` of a named sub-stream.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag,
                                    std::uint64_t index) noexcept {
  return mix64(mix64(seed ^ mix64(tag)) + index);
}

// Tags keeping the sub-streams of one replica apart.
inline constexpr std::uint64_t kTreeStream = 0x7472656573ULL;
inline constexpr std::uint64_t kWalkStream = 0x77616c6b73ULL;
inline constexpr std::uint64_t kReplicaStream = 0x7265706cULL;
inline constexpr std::uint64_t kAuxStream = 0x617578ULL;

/// Root key of a lazily generated tree.
constexpr std::uint64_t tree_root_key(std::uint64_t tree_seed) noexcept {
  return mix64(tree_seed ^ 0x726f6f74ULL);
}

/// Uniform double in [0, 1) from the top 53 bits.
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Counter-based SplitMix64 stream. Satisfies UniformRandomBitGenerator so it
/// can drive the <random> distributions.
class KeyStream {
 public:
  using result_type = std::uint64_t;

  explicit constexpr KeyStream(std::uint64_t key) noexcept : state_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  constexpr double uniform() noexcept { return to_unit((*this)()); }

 private:
  std::uint64_t state_;
};

}  // namespace gwharm
