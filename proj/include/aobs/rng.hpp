#pragma once

#include <cstdint>

namespace aobs {

// Counter-based generator (Philox2x64-10). Output block i of stream s is a
// fixed function of (key, s, i), so every stream owns a disjoint 2^64 slice of
// the counter space and substreams cannot overlap no matter how much each one
// consumes. Identical (seed, stream) gives the identical bit sequence on any
// platform with 64-bit doubles.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : key_(seed), hi_(stream) {}

  // Substream ids pack (purpose, replicate, chain) into the counter high word.
  // replicate < 2^32, chain < 2^16, purpose < 2^16: distinct tuples give
  // distinct streams by construction.
  static Rng substream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t replicate,
                       std::uint64_t chain) noexcept {
    return Rng(seed, (purpose << 48) | ((replicate & 0xffffffffu) << 16) | (chain & 0xffffu));
  }

  std::uint64_t next_u64() noexcept {
    if (have_ == 0) refill();
    return buf_[--have_];
  }

  // Uniform on [0,1), 53 random bits.
  double next_double() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on the open interval (0,1); never returns an exact endpoint.
  double next_open() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t stream() const noexcept { return hi_; }

 private:
  std::uint64_t key_;
  std::uint64_t hi_;
  std::uint64_t lo_ = 0;
  std::uint64_t buf_[2] = {0, 0};
  int have_ = 0;

  void refill() noexcept;
};

}  // namespace aobs
