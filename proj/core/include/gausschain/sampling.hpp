#pragma once

#include <cstdint>
#include <vector>

#include "gausschain/covariance.hpp"
#include "gausschain/rng.hpp"

namespace gausschain {

// One path X = L z, with z drawn sequentially from the stream and L the
// cached lower-triangular factor. Same (stream state, matrix) gives
// bit-identical output regardless of anything running concurrently.
[[nodiscard]] std::vector<double> sample_path(const CovarianceMatrix& cov,
                                              RandomStream& stream);

// Replicate r of model m at size index i draws from its own keyed stream.
[[nodiscard]] std::vector<double> sample_path_keyed(const CovarianceMatrix& cov,
                                                    std::uint64_t master_seed,
                                                    std::uint64_t model_index,
                                                    std::uint64_t n_index,
                                                    std::uint64_t replicate_index);

}  // namespace gausschain
