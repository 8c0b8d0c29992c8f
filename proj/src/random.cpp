#include "postlab/random.hpp"

#include "postlab/special_functions.hpp"

namespace postlab {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::uint64_t s = seed;
  const std::uint64_t seed_key = splitmix64(s);
  std::uint64_t t = stream_id ^ 0x5851f42d4c957f2dULL;
  const std::uint64_t stream_key = splitmix64(t);
  std::uint64_t mix = seed_key ^ rotl(stream_key, 17);
  for (auto& word : state_) word = splitmix64(mix);
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
}

std::uint64_t RandomStream::next_u64() {
  ++counter_;
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RandomStream::next_uniform() {
  // 52 bits keep (k + 1/2)·2⁻⁵² exactly representable and strictly below 1.
  const std::uint64_t k = next_u64() >> 12;
  return (static_cast<double>(k) + 0.5) * 0x1.0p-52;
}

double RandomStream::next_normal() { return inv_norm_cdf(next_uniform()); }

std::uint64_t RandomStream::next_below(std::uint64_t bound) {
  if (bound == 0) return 0;
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r < limit) return r % bound;
  }
}

std::vector<double> uniform_stream(RandomStream& rs, std::size_t n) {
  std::vector<double> out(n);
  for (auto& x : out) x = rs.next_uniform();
  return out;
}

}  // namespace postlab
