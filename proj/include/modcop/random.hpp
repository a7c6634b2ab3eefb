#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace modcop {

/// Counter-based generator (Philox4x32-10) keyed by a 64-bit seed.
///
/// A (seed, stream) pair names an independent substream, so work split by
/// stream index yields identical draws no matter how it is scheduled.
class CounterRng {
 public:
  using Block = std::array<std::uint32_t, 4>;

  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint64_t next_u64() noexcept;

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() noexcept;

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;

  /// The raw bijection, exposed for known-answer tests.
  static Block philox(Block counter, std::array<std::uint32_t, 2> key) noexcept;

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  Block buffer_{};
  int buffered_ = 0;  // u64 values left in buffer_
};

}  // namespace modcop
