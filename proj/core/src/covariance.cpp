#include "gausschain/covariance.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "gausschain/errors.hpp"

namespace gausschain {

namespace {
constexpr std::size_t kMaxDenseSize = 16384;
constexpr double kMaxJitterScale = 1e-10;  // relative to s^2
}  // namespace

std::string CovarianceSpec::label() const {
  std::ostringstream out;
  switch (kind) {
    case CovarianceKind::iid:
      out << "iid";
      break;
    case CovarianceKind::ar1:
      out << "ar1(" << parameter << ")";
      break;
    case CovarianceKind::equicorrelated:
      out << "equicorrelated(" << parameter << ")";
      break;
    case CovarianceKind::power_decay:
      out << "power_decay(" << parameter << ")";
      break;
    case CovarianceKind::explicit_matrix:
      out << "explicit";
      break;
  }
  return out.str();
}

CovarianceSpec iid_spec(std::size_t n, double s) {
  return CovarianceSpec{CovarianceKind::iid, n, s, 0.0, {}};
}

CovarianceSpec ar1_spec(std::size_t n, double rho, double s) {
  return CovarianceSpec{CovarianceKind::ar1, n, s, rho, {}};
}

CovarianceSpec equicorrelated_spec(std::size_t n, double rho, double s) {
  return CovarianceSpec{CovarianceKind::equicorrelated, n, s, rho, {}};
}

CovarianceSpec power_decay_spec(std::size_t n, double alpha, double s) {
  return CovarianceSpec{CovarianceKind::power_decay, n, s, alpha, {}};
}

CovarianceSpec explicit_spec(std::string csv_path) {
  CovarianceSpec spec;
  spec.kind = CovarianceKind::explicit_matrix;
  spec.file = std::move(csv_path);
  return spec;
}

double CovarianceMatrix::entry(std::size_t i, std::size_t j) const {
  if (i >= n() || j >= n()) {
    throw std::invalid_argument("covariance entry index out of range");
  }
  if (diagonal()) return (i == j) ? s() * s() : 0.0;
  return sigma(long(i), long(j));
}

double CovarianceMatrix::correlation(std::size_t i, std::size_t j) const {
  return entry(i, j) / (s() * s());
}

namespace {

void check_common(const CovarianceSpec& spec) {
  if (spec.n == 0) {
    throw std::invalid_argument("covariance: n must be at least 1");
  }
  if (!(spec.s > 0.0) || !std::isfinite(spec.s)) {
    throw std::invalid_argument("covariance: s must be positive and finite");
  }
}

Eigen::MatrixXd fill_entries(const CovarianceSpec& spec) {
  const long n = long(spec.n);
  const double variance = spec.s * spec.s;
  Eigen::MatrixXd sigma(n, n);
  switch (spec.kind) {
    case CovarianceKind::ar1: {
      if (!(std::fabs(spec.parameter) < 1.0)) {
        throw std::invalid_argument("ar1: |rho| must be below 1");
      }
      std::vector<double> lag(spec.n);
      for (std::size_t k = 0; k < spec.n; ++k) {
        lag[k] = std::pow(spec.parameter, double(k));
      }
      for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j) sigma(i, j) = variance * lag[std::size_t(std::labs(i - j))];
      break;
    }
    case CovarianceKind::equicorrelated: {
      // Negative rho turns non-PSD at n > 1/|rho| + 1; not worth the foot-gun.
      if (!(spec.parameter >= 0.0) || !(spec.parameter < 1.0)) {
        throw std::invalid_argument("equicorrelated: rho must lie in [0, 1)");
      }
      sigma.setConstant(variance * spec.parameter);
      sigma.diagonal().setConstant(variance);
      break;
    }
    case CovarianceKind::power_decay: {
      if (!(spec.parameter > 0.0) || !std::isfinite(spec.parameter)) {
        throw std::invalid_argument("power_decay: alpha must be positive");
      }
      std::vector<double> lag(spec.n);
      for (std::size_t k = 0; k < spec.n; ++k) {
        lag[k] = std::pow(1.0 + double(k), -spec.parameter);
      }
      for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j) sigma(i, j) = variance * lag[std::size_t(std::labs(i - j))];
      break;
    }
    default:
      throw std::logic_error("fill_entries: unexpected kind");
  }
  return sigma;
}

// First leading minor that fails a plain Cholesky, 1-based; 0 means none.
std::size_t failing_minor(const Eigen::MatrixXd& sigma) {
  const long n = sigma.rows();
  Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(n, n);
  for (long j = 0; j < n; ++j) {
    double diag = sigma(j, j);
    for (long k = 0; k < j; ++k) diag -= chol(j, k) * chol(j, k);
    if (!(diag > 0.0)) return std::size_t(j) + 1;
    chol(j, j) = std::sqrt(diag);
    for (long i = j + 1; i < n; ++i) {
      double sum = sigma(i, j);
      for (long k = 0; k < j; ++k) sum -= chol(i, k) * chol(j, k);
      chol(i, j) = sum / chol(j, j);
    }
  }
  return 0;
}

Eigen::MatrixXd read_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("explicit covariance: cannot open " + path);
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        const double value = std::stod(cell, &used);
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
        if (used != cell.size()) throw std::invalid_argument("trailing junk");
        row.push_back(value);
      } catch (const std::exception&) {
        std::ostringstream msg;
        msg << "explicit covariance: bad number at " << path << ":" << line_no
            << " field " << (row.size() + 1);
        throw std::invalid_argument(msg.str());
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw std::invalid_argument("explicit covariance: empty file " + path);
  }
  const std::size_t n = rows.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) {
      std::ostringstream msg;
      msg << "explicit covariance: matrix is not square; row " << (i + 1) << " has "
          << rows[i].size() << " fields, expected " << n;
      throw std::invalid_argument(msg.str());
    }
  }
  const Eigen::Index dim = Eigen::Index(n);
  Eigen::MatrixXd sigma(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j)
      sigma(i, j) = rows[std::size_t(i)][std::size_t(j)];
  return sigma;
}

}  // namespace

CovarianceMatrix build_covariance(const CovarianceSpec& spec_in) {
  CovarianceSpec spec = spec_in;
  CovarianceMatrix cov;

  if (spec.kind == CovarianceKind::explicit_matrix) {
    Eigen::MatrixXd sigma = read_csv_matrix(spec.file);
    const std::size_t n = std::size_t(sigma.rows());
    const double scale = sigma.cwiseAbs().maxCoeff();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double a = sigma(long(i), long(j));
        const double b = sigma(long(j), long(i));
        if (std::fabs(a - b) > 1e-12 * std::max({std::fabs(a), std::fabs(b), scale})) {
          std::ostringstream msg;
          msg << "explicit covariance: entries (" << i << "," << j
              << ") and (" << j << "," << i << ") are not symmetric: " << a << " vs " << b;
          throw std::invalid_argument(msg.str());
        }
      }
    }
    sigma = ((sigma + sigma.transpose()) * 0.5).eval();
    const double variance = sigma(0, 0);
    if (!(variance > 0.0)) {
      throw std::invalid_argument("explicit covariance: diagonal must be positive");
    }
    for (std::size_t i = 1; i < n; ++i) {
      if (std::fabs(sigma(long(i), long(i)) - variance) > 1e-12 * variance) {
        std::ostringstream msg;
        msg << "explicit covariance: diagonal entry " << i
            << " differs from entry 0; a single marginal variance is required";
        throw std::invalid_argument(msg.str());
      }
    }
    spec.n = n;
    spec.s = std::sqrt(variance);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (std::fabs(sigma(long(i), long(j))) > variance * (1.0 + 1e-9)) {
          std::ostringstream msg;
          msg << "explicit covariance: |sigma(" << i << "," << j
              << ")| exceeds the common variance; correlations must lie in [-1, 1]";
          throw std::invalid_argument(msg.str());
        }
      }
    }
    cov.sigma = std::move(sigma);
  } else {
    check_common(spec);
    if (spec.kind != CovarianceKind::iid) {
      if (spec.n > kMaxDenseSize) {
        std::ostringstream msg;
        msg << "dense covariance with n = " << spec.n << " exceeds the supported cap "
            << kMaxDenseSize << "; reduce n";
        throw ResourceError(msg.str());
      }
      cov.sigma = fill_entries(spec);
    }
  }
  check_common(spec);
  cov.spec = spec;

  const double variance = spec.s * spec.s;
  if (cov.diagonal()) {
    cov.mass_signed = double(spec.n);
    cov.mass_absolute = double(spec.n);
    cov.nonnegative_correlation = true;
    return cov;
  }

  // Correlation masses, accumulated in a fixed row-major order.
  double mass = 0.0;
  double mass_abs = 0.0;
  bool nonneg = true;
  for (long i = 0; i < cov.sigma.rows(); ++i) {
    for (long j = 0; j < cov.sigma.cols(); ++j) {
      const double d = cov.sigma(i, j) / variance;
      mass += d;
      mass_abs += std::fabs(d);
      nonneg = nonneg && d >= 0.0;
    }
  }
  cov.mass_signed = mass;
  cov.mass_absolute = mass_abs;
  cov.nonnegative_correlation = nonneg;

  // Factor with escalating diagonal jitter; reject with the failing leading
  // minor once the documented jitter budget is exhausted.
  for (double scale : {0.0, 1e-14, 1e-12, kMaxJitterScale}) {
    Eigen::MatrixXd candidate = cov.sigma;
    if (scale > 0.0) candidate.diagonal().array() += scale * variance;
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(candidate);
    if (llt.info() == Eigen::Success) {
      cov.jitter = scale * variance;
      cov.factor = std::move(candidate);
      cov.factor.triangularView<Eigen::StrictlyUpper>().setZero();
      return cov;
    }
  }
  std::ostringstream msg;
  msg << "covariance is not positive semidefinite within jitter 1e-10*s^2; "
      << "leading minor of order " << failing_minor(cov.sigma) << " is not positive";
  throw NumericalError(msg.str());
}

double correlation_mass(const CovarianceMatrix& cov, DeltaMode mode) {
  return mode == DeltaMode::signed_sum ? cov.mass_signed : cov.mass_absolute;
}

}  // namespace gausschain
