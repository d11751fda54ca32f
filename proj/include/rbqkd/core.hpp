// Finite-dimensional states, measurements and maps.
//
// All value types validate their invariants on construction and are
// immutable afterwards.
#pragma once

#include "rbqkd/errors.hpp"
#include "rbqkd/linalg.hpp"

#include <array>
#include <optional>
#include <utility>

namespace rbqkd {

/// Normalized vector on a composite space.
class PureState {
 public:
  PureState(ComplexVector amplitudes, Dims dims);
  explicit PureState(ComplexVector amplitudes);

  /// Normalizes first; throws if the vector vanishes.
  static PureState normalized(ComplexVector amplitudes, Dims dims);

  const ComplexVector& amplitudes() const { return amplitudes_; }
  const Dims& dims() const { return dims_; }
  std::size_t dim() const { return static_cast<std::size_t>(amplitudes_.size()); }

  ComplexMatrix projector() const { return amplitudes_ * amplitudes_.adjoint(); }

 private:
  ComplexVector amplitudes_;
  Dims dims_;
};

/// Hermitian, positive semidefinite, unit-trace operator with declared factors.
class DensityOperator {
 public:
  DensityOperator(ComplexMatrix matrix, Dims system_dims);
  explicit DensityOperator(ComplexMatrix matrix);
  explicit DensityOperator(const PureState& psi);

  /// Rescales a nonzero PSD matrix to unit trace before validating.
  static DensityOperator from_unnormalized(const ComplexMatrix& m, Dims system_dims);
  static DensityOperator maximally_mixed(std::size_t dim);

  const ComplexMatrix& matrix() const { return matrix_; }
  const Dims& system_dims() const { return dims_; }
  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }

  /// Eigenvalues in ascending order, small negative drift clamped to zero.
  RealVector eigenvalues() const { return clamped_eigenvalues(matrix_); }

 private:
  ComplexMatrix matrix_;
  Dims dims_;
};

/// Two-outcome projective measurement {M_0, M_1}.
class BinaryPvm {
 public:
  BinaryPvm(ComplexMatrix effect0, ComplexMatrix effect1);
  /// {P, 1-P}.
  static BinaryPvm from_projector(const ComplexMatrix& p);

  const ComplexMatrix& effect(std::size_t outcome) const { return effects_.at(outcome); }
  std::size_t dim() const { return static_cast<std::size_t>(effects_[0].rows()); }

 private:
  std::array<ComplexMatrix, 2> effects_;
};

/// Hermitian involution X = M_0 - M_1.
class Reflection {
 public:
  explicit Reflection(ComplexMatrix matrix);
  static Reflection from_pvm(const BinaryPvm& pvm);

  const ComplexMatrix& matrix() const { return matrix_; }
  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }

  /// Spectral projector (1 + (-1)^a X)/2.
  ComplexMatrix effect(std::size_t outcome) const;
  BinaryPvm pvm() const { return BinaryPvm(effect(0), effect(1)); }

 private:
  ComplexMatrix matrix_;
};

/// Linear map V with V†V = 1 on the domain.
class Isometry {
 public:
  explicit Isometry(ComplexMatrix matrix);
  static Isometry identity(std::size_t dim);

  const ComplexMatrix& matrix() const { return matrix_; }
  std::size_t domain_dim() const { return static_cast<std::size_t>(matrix_.cols()); }
  std::size_t codomain_dim() const { return static_cast<std::size_t>(matrix_.rows()); }

 private:
  ComplexMatrix matrix_;
};

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);
DensityOperator tensor(const DensityOperator& a, const DensityOperator& b);
PureState tensor(const PureState& a, const PureState& b);

DensityOperator partial_trace(const DensityOperator& rho, const std::vector<std::size_t>& keep);

/// Canonical purification sum_i sqrt(l_i) |e_i>|i> on dim × dim, declared as
/// two factors (system, purifier).
PureState purify(const DensityOperator& rho);

/// Reduced state of a pure state on the listed factors.
DensityOperator reduced_state(const PureState& psi, const std::vector<std::size_t>& keep);

/// W : F → G with (1_A ⊗ W)|psi> = |phi>, where psi lives on A ⊗ F and phi on
/// A ⊗ G. Both states must declare exactly the dims {dA, dF} / {dA, dG}.
/// Requires dG >= dF. Throws MarginalMismatch if the A-marginals differ by
/// more than `tol` in max-entry norm.
Isometry uhlmann_isometry(const PureState& psi, const PureState& phi, double tol = 1e-8);

/// Half the trace norm of a - b.
double trace_distance(const DensityOperator& a, const DensityOperator& b);
double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b);

/// Expectation <psi|op|psi> (real part).
double expectation(const PureState& psi, const ComplexMatrix& op);
double expectation(const DensityOperator& rho, const ComplexMatrix& op);

/// Maximally entangled state (|00> + |11> + ...)/sqrt(d) on d × d.
PureState maximally_entangled(std::size_t d = 2);

/// Computational basis vector |k> in dimension d.
ComplexVector basis_vector(std::size_t d, std::size_t k);

}  // namespace rbqkd
