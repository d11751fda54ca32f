// Generic dense helpers shared by every module.
//
// Subsystem convention: a composite space H_0 ⊗ H_1 ⊗ ... ⊗ H_{n-1} is laid
// out in row-major Kronecker order, i.e. the index of |i_0 i_1 ... i_{n-1}>
// is ((i_0 d_1 + i_1) d_2 + i_2) ... . Whenever parties appear together the
// factor order is A, B, F, G, E (left to right).
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <cstddef>
#include <numeric>
#include <vector>

namespace rbqkd {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Dims = std::vector<std::size_t>;

inline constexpr double kStructuralTol = 1e-9;
inline constexpr double kReconstructionTol = 1e-7;
inline constexpr double kStateTol = 1e-10;

/// Kronecker product a ⊗ b.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Result = Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Result out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// Left fold of kron over a list of factors.
template <typename Matrix>
Matrix kron_all(const std::vector<Matrix>& factors) {
  Matrix out = Matrix::Identity(1, 1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

template <typename Derived>
typename Derived::PlainObject anticommutator(const Eigen::MatrixBase<Derived>& x,
                                             const Eigen::MatrixBase<Derived>& z) {
  return x * z + z * x;
}

template <typename Derived>
double hermiticity_defect(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

template <typename Derived>
typename Derived::PlainObject hermitian_part(const Eigen::MatrixBase<Derived>& m) {
  return (m + m.adjoint()) / 2.0;
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

inline std::size_t dims_product(const Dims& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

/// Eigenvalues of a Hermitian matrix with values in [-tol, 0) clamped to 0.
RealVector clamped_eigenvalues(const ComplexMatrix& herm, double tol = kStateTol);

/// f(H) for Hermitian H via its eigendecomposition; eigenvalues are clamped
/// at zero from below first.
template <typename Fn>
ComplexMatrix psd_function(const ComplexMatrix& herm, Fn fn) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(herm));
  RealVector ev = es.eigenvalues().cwiseMax(0.0);
  RealVector mapped = ev.unaryExpr(fn);
  return es.eigenvectors() * mapped.asDiagonal() * es.eigenvectors().adjoint();
}

ComplexMatrix psd_sqrt(const ComplexMatrix& herm);

/// Sum of singular values.
double trace_norm(const ComplexMatrix& m);

/// Operator (spectral) norm.
double operator_norm(const ComplexMatrix& m);

/// Reorders tensor factors: output factor k is input factor perm[k].
ComplexMatrix permute_subsystems(const ComplexMatrix& op, const Dims& dims, const std::vector<std::size_t>& perm);
ComplexVector permute_subsystems(const ComplexVector& vec, const Dims& dims, const std::vector<std::size_t>& perm);

/// Partial trace of an arbitrary square operator, keeping the listed factors
/// in their original relative order.
ComplexMatrix partial_trace(const ComplexMatrix& op, const Dims& dims, const std::vector<std::size_t>& keep);

/// Embeds `op` acting on factor `site` into the full space as 1 ⊗ op ⊗ 1.
ComplexMatrix embed_operator(const ComplexMatrix& op, const Dims& dims, std::size_t site);

namespace pauli {
ComplexMatrix identity();
ComplexMatrix x();
ComplexMatrix y();
ComplexMatrix z();
/// cos(t) Z + sin(t) X: a reflection in the X–Z plane of the Bloch sphere.
ComplexMatrix xz_plane(double t);
}  // namespace pauli

}  // namespace rbqkd
