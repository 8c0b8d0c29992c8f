#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace postlab {

/// Deterministic splittable stream: (seed, stream_id) is mixed with SplitMix64
/// into the state of a xoshiro256** generator. A plain value type; copies
/// replay the same sequence from the point of copy.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  /// Number of 64-bit words drawn so far.
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1): (k + 1/2)·2⁻⁵² for a 52-bit k.
  double next_uniform();
  /// Standard normal by inversion, Φ⁻¹(next_uniform()).
  double next_normal();
  /// Uniform integer in [0, bound) by rejection.
  std::uint64_t next_below(std::uint64_t bound);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 4> state_{};
};

std::uint64_t splitmix64(std::uint64_t& state);

/// n draws from rs; values lie in (0, 1) ⊂ [0, 1).
std::vector<double> uniform_stream(RandomStream& rs, std::size_t n);

}  // namespace postlab
