#pragma once

#include <cstdint>
#include <limits>

namespace tlsfluct {

/// Counter-based random stream.
///
/// Every stream is a pure function of (key, counter): the key is derived from
/// the master seed and a stream id, and each draw hashes key + counter with the
/// SplitMix64 finalizer. Two streams with the same (seed, id) therefore emit
/// the same sequence no matter how many other streams were consumed before
/// them, which is what makes parallel generation deterministic.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t seed, std::uint64_t stream_id);

  /// Independent child stream keyed by this stream's key and `child_id`.
  /// Does not advance the parent.
  RandomStream substream(std::uint64_t child_id) const;

  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform double in (0, 1].
  double uniform_positive();

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t counter() const noexcept { return counter_; }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

 private:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t key);

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace tlsfluct
