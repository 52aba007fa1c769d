#include "gausschain/sampling.hpp"

namespace gausschain {

std::vector<double> sample_path(const CovarianceMatrix& cov, RandomStream& stream) {
  const std::size_t n = cov.n();
  std::vector<double> path(n);
  if (cov.diagonal()) {
    const double s = cov.s();
    for (std::size_t i = 0; i < n; ++i) path[i] = s * stream.next_normal();
    return path;
  }
  const Eigen::Index dim = Eigen::Index(n);
  Eigen::VectorXd z(dim);
  for (Eigen::Index i = 0; i < dim; ++i) z(i) = stream.next_normal();
  Eigen::Map<Eigen::VectorXd> out(path.data(), dim);
  out.noalias() = cov.factor.triangularView<Eigen::Lower>() * z;
  return path;
}

std::vector<double> sample_path_keyed(const CovarianceMatrix& cov,
                                      std::uint64_t master_seed,
                                      std::uint64_t model_index,
                                      std::uint64_t n_index,
                                      std::uint64_t replicate_index) {
  RandomStream stream =
      RandomStream::keyed(master_seed, model_index, n_index, replicate_index);
  return sample_path(cov, stream);
}

}  // namespace gausschain
