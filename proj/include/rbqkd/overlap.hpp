// Effective overlap of two binary measurements: canonical two-projection
// blocks and the upper bounds built from them.
#pragma once

#include "rbqkd/core.hpp"

#include <optional>
#include <vector>

namespace rbqkd {

/// A reducing subspace of a pair of projections (p, q).
struct OverlapBlock {
  ComplexMatrix projector;
  std::size_t dim = 1;      ///< 1 or 2
  double cos_theta = 1.0;   ///< 2x - 1 for 2D blocks; +-1 for 1D blocks
  int p_value = 0;          ///< eigenvalue of p on a 1D block
  int q_value = 0;          ///< eigenvalue of q on a 1D block
  double weight = 0.0;      ///< tr[sigma P_k]

  double angle() const { return std::acos(std::clamp(cos_theta, -1.0, 1.0)); }
};

struct BlockDecomposition {
  std::vector<OverlapBlock> blocks;

  double total_weight() const;
  /// sum_k P_k
  ComplexMatrix resolution() const;
  /// max over blocks of |P_k m P_k - P_k m| (how far m is from reduced).
  double reduction_defect(const ComplexMatrix& m) const;
  /// 4 sum_k w_k cos^2 theta_k over every block.
  double trace_identity_rhs() const;
};

struct OverlapReport {
  double block_bound = 1.0;
  double anticommutator_bound = 1.0;
  std::optional<double> chsh_bound;
};

/// Blocks whose 2D members have x_k = eigenvalue of pqp on range(p) strictly
/// inside (tol, 1 - tol). Throws NotAProjector when idempotency fails by more
/// than 1e-8.
BlockDecomposition two_projection_blocks(const ComplexMatrix& p, const ComplexMatrix& q, const DensityOperator& sigma,
                                         double tol = kStructuralTol);

/// sum_k w_k (1/2 + |cos theta_k| / 2)
double cstar_block_bound(const BlockDecomposition& d);

/// 1/2 + (1/4) sqrt(tr[sigma {X, Z}^2]), clamped to [1/2, 1].
double cstar_anticommutator_bound(const DensityOperator& sigma, const Reflection& x, const Reflection& z);

/// 1/2 + (omega/8) sqrt(8 - omega^2) + eps/2, clamped to [1/2, 1].
double cstar_chsh_bound(double omega, double marginal_eps);

/// bound + trace_distance(tau, tau_prime), clamped to [1/2, 1].
double cstar_continuity_shift(double bound, const DensityOperator& tau, const DensityOperator& tau_prime);

/// All bounds for sigma and reflections X, Z; the CHSH bound when omega is given.
OverlapReport overlap_report(const DensityOperator& sigma, const Reflection& x, const Reflection& z,
                             std::optional<double> omega = std::nullopt, double marginal_eps = 0.0);

/// Pi_a = I M_a I†, with (1 - I I†) added to the distinguished outcome.
BinaryPvm feasible_dilation_povms(const BinaryPvm& pvm, const Isometry& iso, std::size_t padded_outcome = 0);

}  // namespace rbqkd
