// Local dilations of CHSH strategies, the compressed state, the entropy
// transfer check, and a heuristic solver for the relaxed device-dependent
// entropy problem on two qubits.
#pragma once

#include "rbqkd/chsh.hpp"
#include "rbqkd/models.hpp"
#include "rbqkd/random.hpp"

#include <array>
#include <cstdint>

namespace rbqkd {

/// Norms of the three dilation conditions (each maximized over a and x).
struct DilationDefects {
  double state = 0.0;
  double first = 0.0;
  double partner = 0.0;
  double max() const { return std::max({state, first, partner}); }
};

/// Physical strategy, ideal strategy and local isometries whose outputs are
/// ordered (ideal factor, auxiliary factor). The first party of each strategy
/// is the key party (A or B), the partner is its local tester.
struct DilationPair {
  Strategy physical;
  Strategy ideal;
  Isometry iso_first;
  Isometry iso_partner;
  PureState aux;        ///< on aux_first ⊗ aux_partner
  double epsilon = 0.0; ///< claimed; at least the measured defect
  double leak = 0.0;    ///< weight of the flagged block in the physical state
  bool flagged = false; ///< built by build_flag_dilation

  DilationDefects measured() const;
  std::size_t ideal_dim_first() const { return ideal.dim_a(); }
  std::size_t ideal_dim_partner() const { return ideal.dim_p(); }
  /// Physical reduced state of the key party.
  DensityOperator first_marginal() const;
};

/// Each party holds a qubit and an auxiliary qubit. The state is the ideal one
/// with weight 1 - leak plus a leaked product block flagged by |11> on the
/// auxiliaries; the key party's observables are rotated by `angle` in the
/// unflagged block. The isometries only regroup factors; epsilon is measured.
DilationPair build_test_dilation(double angle, double leak);

/// Same strategy conjugated by a CNOT from each qubit onto its auxiliary, so
/// the auxiliaries carry a copy of the Z value; isometries undo the CNOTs.
DilationPair build_flag_dilation(double angle, double leak);

/// Random leak and bisection on angle so that the measured defect is at most
/// `target` and within 1e-6 of it (target 0 gives the exact embedding).
DilationPair dilation_with_epsilon(double target, Rng& rng);

/// A state on (A, B) = (first party of dp_a, first party of dp_b) whose
/// marginals equal the dilations' physical marginals. Only defined for pairs
/// produced by this module: the unflagged sectors carry a random Bell-diagonal
/// state, the leaked sectors product states, the sector labels are coupled at
/// random, and a random fraction of the product of marginals is mixed in.
DensityOperator random_compatible_state(const DilationPair& dp_a, const DilationPair& dp_b, Rng& rng);

/// tr_aux[(I_A ⊗ I_B) rho (I_A ⊗ I_B)†] on the ideal factors.
DensityOperator compress_state(const DensityOperator& rho_ab, const Isometry& iso_a, const Isometry& iso_b,
                               std::size_t ideal_dim_a, std::size_t ideal_dim_b);

/// Max over the two factors of the trace distance between rho's marginal and
/// the dilations' physical marginals.
double dilation_marginal_defect(const DilationPair& dp_a, const DilationPair& dp_b, const DensityOperator& rho_ab);

struct CompressionCheck {
  double deviation = 0.0;  ///< max_{a,b,x,y} |tr[rho M⊗N] - tr[rho~ M~⊗N~]|
  double bound = 0.0;      ///< 3 (eps_A + eps_B)
  double marginal_defect = 0.0;
  bool holds() const { return deviation <= bound + 1e-9; }
};

/// Throws MarginalMismatch when rho's marginals differ from the dilations'
/// physical marginals by more than `tol`.
CompressionCheck verify_compression(const DilationPair& dp_a, const DilationPair& dp_b, const DensityOperator& rho_ab,
                                    double tol = 1e-8);

struct EntropyTransferCheck {
  double lhs = 0.0;        ///< H(A|E) of the physical measurement, E purifying rho_AB
  double rhs = 0.0;        ///< H(A|E') of the ideal measurement on the lifted state
  double continuity = 0.0; ///< f(|A| eps_A, |A|)
  double slack = 0.0;      ///< lhs - (rhs - continuity)
  double marginal_defect = 0.0;
  bool holds() const { return slack >= -1e-8; }
};

EntropyTransferCheck verify_entropy_transfer(const DilationPair& dp_a, const DilationPair& dp_b,
                                             const DensityOperator& rho_ab, std::size_t x_tilde, double tol = 1e-8);

/// Fixed two-qubit measurements for the relaxed problem.
struct LiftMeasurements {
  std::array<BinaryPvm, 2> alice;
  std::array<BinaryPvm, 2> bob;
};

/// Alice X, Z; Bob (X+Z)/sqrt2, (X-Z)/sqrt2.
LiftMeasurements ideal_lift_measurements();

/// Statistics of (1 - 2Q) Φ+ + 2Q I/4 under the ideal lift measurements.
Behavior bb84_behavior(double qber);

struct LiftProblem {
  Behavior target;
  double eps_prob = 0.0;
  std::size_t key_setting = 0;
  LiftMeasurements measurements = ideal_lift_measurements();
};

struct RelaxedOptions {
  std::size_t restarts = 64;
  std::uint64_t seed = 1;
  std::size_t workers = 0;  ///< 0 picks the hardware concurrency
  double residual_tol = 1e-6;
  double penalty = 1e4;
};

struct RelaxedSolution {
  double entropy = 0.0;
  DensityOperator state = DensityOperator::maximally_mixed(4);
  double residual = 0.0;
  std::size_t feasible_restarts = 0;
  std::size_t best_restart = 0;
};

/// H(A_x|E) = S(pinched rho) - S(rho) for a purifying E, in bits.
double lift_objective(const DensityOperator& rho, const BinaryPvm& key_pvm);

/// max_j max(0, |tr[rho Pi_j] - p_j| - eps_prob)
double lift_residual(const LiftProblem& p, const ComplexMatrix& rho);

/// Multi-start local search; a heuristic estimate of the infimum, not a
/// certified bound. Throws NoFeasiblePoint when no restart reaches the
/// residual tolerance.
RelaxedSolution solve_relaxed_opt(const LiftProblem& p, const RelaxedOptions& opts = {});

struct ReductionResult {
  double relaxed = 0.0;
  double continuity = 0.0;
  double value = 0.0;
  double eps_prob = 0.0;
  RelaxedSolution solution;
};

/// Relaxed optimum at eps_prob = 3(eps_A + eps_B) + extra_slack minus
/// f(|A| eps_A, |A|). extra_slack absorbs statistical noise in estimated
/// behaviors.
ReductionResult reduction_chain(const Behavior& p, double eps_a, double eps_b, std::size_t x_tilde,
                                const RelaxedOptions& opts = {}, double extra_slack = 0.0);

}  // namespace rbqkd
