#include "aobs/rng.hpp"

namespace aobs {
namespace {

constexpr std::uint64_t kMul = 0xD2B74407B1CE6E93ull;
constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ull;

inline void round_once(std::uint64_t& x0, std::uint64_t& x1, std::uint64_t k) {
  const unsigned __int128 prod = static_cast<unsigned __int128>(kMul) * x0;
  const std::uint64_t hi = static_cast<std::uint64_t>(prod >> 64);
  const std::uint64_t lo = static_cast<std::uint64_t>(prod);
  x0 = hi ^ k ^ x1;
  x1 = lo;
}

}  // namespace

void Rng::refill() noexcept {
  std::uint64_t x0 = hi_;
  std::uint64_t x1 = lo_++;
  std::uint64_t k = key_;
  for (int r = 0; r < 10; ++r) {
    round_once(x0, x1, k);
    k += kWeyl;
  }
  buf_[0] = x0;
  buf_[1] = x1;
  have_ = 2;
}

}  // namespace aobs
