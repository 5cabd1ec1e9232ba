#pragma once

// Counter-based random number generation (Philox4x32-10, Salmon et al. 2011,
// "Parallel random numbers: as easy as 1, 2, 3").
//
// Every generator is identified by a 64-bit user seed plus a 64-bit stream id.
// The seed is the Philox key; the stream id occupies the high half of the
// 128-bit counter and the block index the low half, so streams never overlap
// and any block is addressable without sequencing. Substreams are derived
// from a parent stream by label and index through a fixed splitmix64 chain;
// the whole scheme is bit-exact and is treated as a stable output format:
// changing any constant here is a breaking change for stored results.

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace sweetspot {

namespace detail {

inline constexpr uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline constexpr uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xCBF29CE484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

// One 10-round Philox4x32 block: 128-bit counter, 64-bit key, 128-bit output.
inline std::array<uint32_t, 4> philox4x32_10(std::array<uint32_t, 4> ctr,
                                             std::array<uint32_t, 2> key) {
  constexpr uint32_t kMul0 = 0xD2511F53u;
  constexpr uint32_t kMul1 = 0xCD9E8D57u;
  constexpr uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const uint64_t p0 = static_cast<uint64_t>(kMul0) * ctr[0];
    const uint64_t p1 = static_cast<uint64_t>(kMul1) * ctr[2];
    ctr = {static_cast<uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<uint32_t>(p1),
           static_cast<uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<uint32_t>(p0)};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

}  // namespace detail

class Rng {
 public:
  explicit Rng(uint64_t seed, uint64_t stream = 0) : seed_(seed), stream_(stream) {}

  uint64_t seed() const { return seed_; }
  uint64_t stream() const { return stream_; }

  // Child stream: stream' = splitmix(splitmix(stream ^ fnv1a(label)) ^ index).
  Rng derive(std::string_view label, uint64_t index = 0) const {
    const uint64_t s = detail::splitmix64(detail::splitmix64(stream_ ^ detail::fnv1a64(label)) ^ index);
    return Rng(seed_, s);
  }

  // A plain 64-bit seed for components that take one, derived the same way.
  uint64_t derive_seed(std::string_view label, uint64_t index = 0) const {
    const Rng child = derive(label, index);
    return detail::splitmix64(child.seed_ ^ detail::splitmix64(child.stream_));
  }

  uint64_t next_u64() {
    if (avail_ == 0) {
      const auto out = detail::philox4x32_10(
          {static_cast<uint32_t>(block_), static_cast<uint32_t>(block_ >> 32),
           static_cast<uint32_t>(stream_), static_cast<uint32_t>(stream_ >> 32)},
          {static_cast<uint32_t>(seed_), static_cast<uint32_t>(seed_ >> 32)});
      ++block_;
      buf_[0] = (static_cast<uint64_t>(out[1]) << 32) | out[0];
      buf_[1] = (static_cast<uint64_t>(out[3]) << 32) | out[2];
      avail_ = 2;
    }
    return buf_[2 - avail_--];
  }

  // Uniform on [0, 1), 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal (Box-Muller, cosine branch); consumes exactly two words.
  double next_normal() {
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Unbiased uniform integer in {0, .., bound-1} (Lemire's multiply-shift
  // with rejection).
  uint64_t next_below(uint64_t bound) {
    using u128 = unsigned __int128;
    uint64_t x = next_u64();
    u128 m = static_cast<u128>(x) * bound;
    uint64_t lo = static_cast<uint64_t>(m);
    if (lo < bound) {
      const uint64_t threshold = (0 - bound) % bound;
      while (lo < threshold) {
        x = next_u64();
        m = static_cast<u128>(x) * bound;
        lo = static_cast<uint64_t>(m);
      }
    }
    return static_cast<uint64_t>(m >> 64);
  }

 private:
  uint64_t seed_;
  uint64_t stream_;
  uint64_t block_ = 0;
  std::array<uint64_t, 2> buf_{};
  int avail_ = 0;
};

// Fisher-Yates shuffle driven by the given stream.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (size_t i = v.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(rng.next_below(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace sweetspot
