#pragma once

namespace gausschain {

// Standard normal density phi(x) = exp(-x^2/2)/sqrt(2*pi).
[[nodiscard]] double normal_pdf(double x) noexcept;

// Standard normal CDF, evaluated through erfc for full tail accuracy.
[[nodiscard]] double normal_cdf(double x) noexcept;

// Inverse standard normal CDF on (0, 1). Throws std::invalid_argument
// outside the open interval or on non-finite input.
[[nodiscard]] double normal_quantile(double p);

}  // namespace gausschain
