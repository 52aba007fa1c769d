#include "gausschain/rng.hpp"

#include <cmath>
#include <numbers>

namespace gausschain {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

RandomStream::RandomStream(std::uint64_t seed) {
  std::uint64_t s = seed;
  for (auto& word : state_) word = splitmix64(s);
}

RandomStream RandomStream::keyed(std::uint64_t master_seed, std::uint64_t model_index,
                                 std::uint64_t n_index, std::uint64_t replicate_index) {
  // Absorb the key words through SplitMix64 one at a time; distinct tuples
  // land on distinct, well separated seeds.
  std::uint64_t s = master_seed;
  std::uint64_t h = splitmix64(s);
  s = h ^ (model_index + 0x632be59bd9b4e019ull);
  h = splitmix64(s);
  s = h ^ (n_index + 0x2545f4914f6cdd1dull);
  h = splitmix64(s);
  s = h ^ (replicate_index + 0x9e6c63d0876a9a47ull);
  h = splitmix64(s);
  return RandomStream(h);
}

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}
}  // namespace

std::uint64_t RandomStream::next_u64() noexcept {
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RandomStream::next_uniform() noexcept {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double RandomStream::next_normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

}  // namespace gausschain
