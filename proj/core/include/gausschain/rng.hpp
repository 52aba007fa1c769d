#pragma once

#include <array>
#include <cstdint>

namespace gausschain {

// xoshiro256++ stream with Box-Muller Gaussian output. Streams are derived
// from an integer key tuple, never from each other, so replicate r of model m
// at size index i sees the same draws no matter how work is scheduled.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  // Substream keyed by (master_seed, model_index, n_index, replicate_index).
  static RandomStream keyed(std::uint64_t master_seed, std::uint64_t model_index,
                            std::uint64_t n_index, std::uint64_t replicate_index);

  [[nodiscard]] std::uint64_t next_u64() noexcept;

  // Uniform draw on (0, 1]; never returns 0, so log() stays finite.
  [[nodiscard]] double next_uniform() noexcept;

  // Standard normal draw (Box-Muller, spare cached).
  [[nodiscard]] double next_normal() noexcept;

 private:
  std::array<std::uint64_t, 4> state_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// SplitMix64 mixing step, exposed for deterministic key derivation.
[[nodiscard]] std::uint64_t splitmix64(std::uint64_t& state) noexcept;

}  // namespace gausschain
