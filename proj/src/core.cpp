#include "rbqkd/core.hpp"

#include <sstream>

namespace rbqkd {

namespace {

void require_dims(std::size_t dim, const Dims& dims) {
  if (dims.empty() || dims_product(dims) != dim) {
    std::ostringstream msg;
    msg << "system_dims product does not equal dimension " << dim;
    throw DimensionMismatch(msg.str());
  }
}

double projector_defect(const ComplexMatrix& m) {
  return std::max(hermiticity_defect(m), (m * m - m).cwiseAbs().maxCoeff());
}

}  // namespace

PureState::PureState(ComplexVector amplitudes, Dims dims) : amplitudes_(std::move(amplitudes)), dims_(std::move(dims)) {
  if (!all_finite(amplitudes_)) throw DomainError("non-finite amplitude");
  require_dims(dim(), dims_);
  if (std::abs(amplitudes_.norm() - 1.0) > kStateTol) throw DomainError("pure state is not normalized");
}

PureState::PureState(ComplexVector amplitudes) : PureState(amplitudes, Dims{static_cast<std::size_t>(amplitudes.size())}) {}

PureState PureState::normalized(ComplexVector amplitudes, Dims dims) {
  const double n = amplitudes.norm();
  if (!(n > 0.0)) throw DomainError("cannot normalize a zero vector");
  return PureState(amplitudes / n, std::move(dims));
}

DensityOperator::DensityOperator(ComplexMatrix matrix, Dims system_dims)
    : matrix_(std::move(matrix)), dims_(std::move(system_dims)) {
  if (matrix_.rows() != matrix_.cols()) throw DimensionMismatch("density operator must be square");
  if (!all_finite(matrix_)) throw DomainError("non-finite entry");
  require_dims(dim(), dims_);
  if (hermiticity_defect(matrix_) > kStateTol) throw DomainError("density operator is not Hermitian");
  if (std::abs(matrix_.trace().real() - 1.0) > kStateTol) throw DomainError("density operator trace differs from 1");
  RealVector ev = clamped_eigenvalues(matrix_);
  if (ev.size() > 0 && ev.minCoeff() < 0.0) throw DomainError("density operator has a negative eigenvalue");
}

DensityOperator::DensityOperator(ComplexMatrix matrix)
    : DensityOperator(matrix, Dims{static_cast<std::size_t>(matrix.rows())}) {}

DensityOperator::DensityOperator(const PureState& psi) : DensityOperator(psi.projector(), psi.dims()) {}

DensityOperator DensityOperator::from_unnormalized(const ComplexMatrix& m, Dims system_dims) {
  const double t = m.trace().real();
  if (!(t > 0.0)) throw DomainError("cannot normalize an operator with nonpositive trace");
  ComplexMatrix h = hermitian_part(m) / t;
  return DensityOperator(std::move(h), std::move(system_dims));
}

DensityOperator DensityOperator::maximally_mixed(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return DensityOperator(ComplexMatrix::Identity(d, d) / static_cast<double>(dim));
}

BinaryPvm::BinaryPvm(ComplexMatrix effect0, ComplexMatrix effect1) : effects_{std::move(effect0), std::move(effect1)} {
  const auto& m0 = effects_[0];
  const auto& m1 = effects_[1];
  if (m0.rows() != m0.cols() || m1.rows() != m0.rows() || m1.cols() != m0.cols())
    throw DimensionMismatch("effects must be square and of equal size");
  if (projector_defect(m0) > kStructuralTol || projector_defect(m1) > kStructuralTol)
    throw NotAProjector("effect is not a Hermitian projector");
  const auto d = m0.rows();
  if ((m0 + m1 - ComplexMatrix::Identity(d, d)).cwiseAbs().maxCoeff() > kStructuralTol)
    throw DomainError("effects do not sum to the identity");
  if (operator_norm(m0 * m1) > kStructuralTol) throw NotAProjector("effects are not orthogonal");
}

BinaryPvm BinaryPvm::from_projector(const ComplexMatrix& p) {
  return BinaryPvm(p, ComplexMatrix::Identity(p.rows(), p.cols()) - p);
}

Reflection::Reflection(ComplexMatrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols()) throw DimensionMismatch("reflection must be square");
  if (hermiticity_defect(matrix_) > kStructuralTol) throw DomainError("reflection is not Hermitian");
  const auto d = matrix_.rows();
  if ((matrix_ * matrix_ - ComplexMatrix::Identity(d, d)).cwiseAbs().maxCoeff() > kStructuralTol)
    throw DomainError("reflection does not square to the identity");
}

Reflection Reflection::from_pvm(const BinaryPvm& pvm) { return Reflection(pvm.effect(0) - pvm.effect(1)); }

ComplexMatrix Reflection::effect(std::size_t outcome) const {
  if (outcome > 1) throw DomainError("binary outcome expected");
  const auto d = matrix_.rows();
  const double sign = outcome == 0 ? 1.0 : -1.0;
  return (ComplexMatrix::Identity(d, d) + sign * matrix_) / 2.0;
}

Isometry::Isometry(ComplexMatrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() < matrix_.cols()) throw DimensionMismatch("isometry codomain smaller than domain");
  const auto d = matrix_.cols();
  if ((matrix_.adjoint() * matrix_ - ComplexMatrix::Identity(d, d)).cwiseAbs().maxCoeff() > kStructuralTol)
    throw DomainError("matrix is not an isometry");
}

Isometry Isometry::identity(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return Isometry(ComplexMatrix::Identity(d, d));
}

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) { return kron(a, b); }

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
  Dims dims = a.system_dims();
  dims.insert(dims.end(), b.system_dims().begin(), b.system_dims().end());
  return DensityOperator(kron(a.matrix(), b.matrix()), std::move(dims));
}

PureState tensor(const PureState& a, const PureState& b) {
  Dims dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  return PureState::normalized(kron(a.amplitudes(), b.amplitudes()), std::move(dims));
}

DensityOperator partial_trace(const DensityOperator& rho, const std::vector<std::size_t>& keep) {
  if (keep.empty()) throw DimensionMismatch("keep set must be nonempty");
  ComplexMatrix reduced = partial_trace(rho.matrix(), rho.system_dims(), keep);
  std::vector<std::size_t> sorted(keep);
  std::sort(sorted.begin(), sorted.end());
  Dims dims;
  for (std::size_t k : sorted) dims.push_back(rho.system_dims()[k]);
  return DensityOperator::from_unnormalized(reduced, std::move(dims));
}

PureState purify(const DensityOperator& rho) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho.matrix());
  const auto d = static_cast<Eigen::Index>(rho.dim());
  ComplexVector psi = ComplexVector::Zero(d * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double lam = std::max(es.eigenvalues()(i), 0.0);
    if (lam == 0.0) continue;
    psi += std::sqrt(lam) * kron(ComplexVector(es.eigenvectors().col(i)), ComplexVector(ComplexVector::Unit(d, i)));
  }
  return PureState::normalized(psi, Dims{rho.dim(), rho.dim()});
}

DensityOperator reduced_state(const PureState& psi, const std::vector<std::size_t>& keep) {
  return partial_trace(DensityOperator(psi), keep);
}

Isometry uhlmann_isometry(const PureState& psi, const PureState& phi, double tol) {
  if (psi.dims().size() != 2 || phi.dims().size() != 2) throw DimensionMismatch("expected bipartite states");
  const auto da = static_cast<Eigen::Index>(psi.dims()[0]);
  const auto df = static_cast<Eigen::Index>(psi.dims()[1]);
  const auto dg = static_cast<Eigen::Index>(phi.dims()[1]);
  if (static_cast<Eigen::Index>(phi.dims()[0]) != da) throw DimensionMismatch("A factors differ");
  if (dg < df) throw DimensionMismatch("target purifier smaller than source purifier");

  // Row-major coefficient matrices: entry (a, f) is amplitude of |a>|f>.
  ComplexMatrix c_psi(da, df);
  ComplexMatrix c_phi(da, dg);
  for (Eigen::Index a = 0; a < da; ++a) {
    for (Eigen::Index f = 0; f < df; ++f) c_psi(a, f) = psi.amplitudes()(a * df + f);
    for (Eigen::Index g = 0; g < dg; ++g) c_phi(a, g) = phi.amplitudes()(a * dg + g);
  }
  const double defect = (c_psi * c_psi.adjoint() - c_phi * c_phi.adjoint()).cwiseAbs().maxCoeff();
  if (defect > tol) {
    std::ostringstream msg;
    msg << "A-marginals differ by " << defect;
    throw MarginalMismatch(msg.str());
  }
  // (1 ⊗ W)|psi> has coefficients c_psi W^T; pick M = W^T maximizing overlap.
  Eigen::JacobiSVD<ComplexMatrix> svd(c_psi.adjoint() * c_phi, Eigen::ComputeFullU | Eigen::ComputeFullV);
  ComplexMatrix m = svd.matrixU() * svd.matrixV().leftCols(df).adjoint();
  return Isometry(m.transpose());
}

double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("trace distance of unequal dims");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(ComplexMatrix(a - b)), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const DensityOperator& a, const DensityOperator& b) { return trace_distance(a.matrix(), b.matrix()); }

double expectation(const PureState& psi, const ComplexMatrix& op) {
  if (op.rows() != static_cast<Eigen::Index>(psi.dim())) throw DimensionMismatch("operator does not act on state");
  return psi.amplitudes().dot(op * psi.amplitudes()).real();
}

double expectation(const DensityOperator& rho, const ComplexMatrix& op) {
  if (op.rows() != static_cast<Eigen::Index>(rho.dim())) throw DimensionMismatch("operator does not act on state");
  return (rho.matrix() * op).trace().real();
}

PureState maximally_entangled(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  ComplexVector v = ComplexVector::Zero(n * n);
  for (Eigen::Index i = 0; i < n; ++i) v(i * n + i) = 1.0;
  return PureState::normalized(v, Dims{d, d});
}

ComplexVector basis_vector(std::size_t d, std::size_t k) {
  if (k >= d) throw DimensionMismatch("basis index out of range");
  return ComplexVector::Unit(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k));
}

}  // namespace rbqkd
