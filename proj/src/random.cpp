#include "rbqkd/random.hpp"

namespace rbqkd {

std::uint64_t splitmix(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (counter + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

ComplexMatrix random_ginibre(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < g.cols(); ++j)
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = cplx(re, im);
    }
  return g;
}

ComplexMatrix random_unitary(std::size_t d, Rng& rng) {
  ComplexMatrix g = random_ginibre(d, d, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < q.cols(); ++i) {
    const cplx diag = r(i, i);
    const double mag = std::abs(diag);
    if (mag > 0.0) q.col(i) *= diag / mag;
  }
  return q;
}

Isometry random_isometry(std::size_t d_in, std::size_t d_out, Rng& rng) {
  if (d_out < d_in) throw DimensionMismatch("isometry codomain smaller than domain");
  ComplexMatrix u = random_unitary(d_out, rng);
  return Isometry(u.leftCols(static_cast<Eigen::Index>(d_in)));
}

PureState random_pure_state(const Dims& dims, Rng& rng) {
  ComplexMatrix g = random_ginibre(dims_product(dims), 1, rng);
  return PureState::normalized(g.col(0), dims);
}

DensityOperator random_density(const Dims& dims, Rng& rng, std::size_t rank) {
  const std::size_t d = dims_product(dims);
  if (rank == 0 || rank > d) rank = d;
  ComplexMatrix g = random_ginibre(d, rank, rng);
  return DensityOperator::from_unnormalized(g * g.adjoint(), dims);
}

ComplexMatrix random_projector(std::size_t d, std::size_t rank, Rng& rng) {
  if (rank > d) throw DimensionMismatch("projector rank exceeds dimension");
  ComplexMatrix u = random_unitary(d, rng);
  ComplexMatrix v = u.leftCols(static_cast<Eigen::Index>(rank));
  return v * v.adjoint();
}

}  // namespace rbqkd
