#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>

namespace gausschain {

enum class CovarianceKind { iid, ar1, equicorrelated, power_decay, explicit_matrix };

// Stationary Gaussian sequence description: n centered coordinates with
// common standard deviation s and one of the built-in correlation shapes,
// or an explicit matrix loaded from CSV (n and s then come from the file).
struct CovarianceSpec {
  CovarianceKind kind = CovarianceKind::iid;
  std::size_t n = 0;
  double s = 1.0;
  double parameter = 0.0;  // rho for ar1/equicorrelated, alpha for power_decay
  std::string file;        // explicit_matrix only

  [[nodiscard]] std::string label() const;
};

[[nodiscard]] CovarianceSpec iid_spec(std::size_t n, double s = 1.0);
[[nodiscard]] CovarianceSpec ar1_spec(std::size_t n, double rho, double s = 1.0);
[[nodiscard]] CovarianceSpec equicorrelated_spec(std::size_t n, double rho, double s = 1.0);
[[nodiscard]] CovarianceSpec power_decay_spec(std::size_t n, double alpha, double s = 1.0);
[[nodiscard]] CovarianceSpec explicit_spec(std::string csv_path);

// Validated covariance with its lower-triangular factor. The iid kind keeps
// no dense storage: sigma = s^2 I and L = s I are implicit. Matrices are
// immutable once built and safe to share across threads.
struct CovarianceMatrix {
  CovarianceSpec spec;
  Eigen::MatrixXd sigma;   // empty when diagonal()
  Eigen::MatrixXd factor;  // lower triangular; empty when diagonal()
  double jitter = 0.0;     // diagonal shift needed to factor, 0 for clean PSD
  double mass_signed = 0.0;
  double mass_absolute = 0.0;
  bool nonnegative_correlation = true;

  [[nodiscard]] std::size_t n() const noexcept { return spec.n; }
  [[nodiscard]] double s() const noexcept { return spec.s; }
  [[nodiscard]] bool diagonal() const noexcept { return spec.kind == CovarianceKind::iid; }
  [[nodiscard]] double entry(std::size_t i, std::size_t j) const;
  // Correlation ratio d_ij = sigma_ij / s^2.
  [[nodiscard]] double correlation(std::size_t i, std::size_t j) const;
};

// Builds, validates and factors the covariance. Non-PSD explicit input is
// rejected (NumericalError) with the first failing leading minor; nearly
// singular matrices are accepted with diagonal jitter up to 1e-10 * s^2.
// Dense kinds beyond n = 16384 are refused (ResourceError).
[[nodiscard]] CovarianceMatrix build_covariance(const CovarianceSpec& spec);

enum class DeltaMode { signed_sum, absolute_sum };

// Total correlation mass: sum_{i,j} d_ij (signed) or sum_{i,j} |d_ij|.
[[nodiscard]] double correlation_mass(const CovarianceMatrix& cov, DeltaMode mode);

}  // namespace gausschain
