// Switch/source models: the marginal constraint, the switch attack, the
// equivalence of the two channel models, and local-hidden-variable membership.
#pragma once

#include "rbqkd/core.hpp"
#include "rbqkd/random.hpp"

#include <array>
#include <string>
#include <vector>

namespace rbqkd {

/// CPTP map given by Kraus operators, with declared output factors.
class Channel {
 public:
  Channel(std::vector<ComplexMatrix> kraus, Dims input_dims, Dims output_dims);

  const std::vector<ComplexMatrix>& kraus() const { return kraus_; }
  const Dims& input_dims() const { return input_dims_; }
  const Dims& output_dims() const { return output_dims_; }
  std::size_t input_dim() const { return dims_product(input_dims_); }
  std::size_t output_dim() const { return dims_product(output_dims_); }

  ComplexMatrix apply(const ComplexMatrix& rho) const;
  DensityOperator apply(const DensityOperator& rho) const;

  /// id_{left} ⊗ this, with the new factor placed first on both sides.
  Channel with_identity_on_left(std::size_t left_dim) const;
  /// this ∘ other
  Channel after(const Channel& other) const;

  /// Random channel from a Haar isometry with `kraus_count` operators.
  static Channel random(const Dims& input_dims, const Dims& output_dims, std::size_t kraus_count, Rng& rng);
  static Channel from_isometry(const ComplexMatrix& v, Dims input_dims, Dims output_dims);

 private:
  std::vector<ComplexMatrix> kraus_;
  Dims input_dims_;
  Dims output_dims_;
};

/// Branch states indexed by the switch value t.
class SwitchSource {
 public:
  SwitchSource(std::vector<double> branch_probs, std::vector<DensityOperator> branch_states);

  const std::vector<double>& branch_probs() const { return probs_; }
  const std::vector<DensityOperator>& branch_states() const { return states_; }

 private:
  std::vector<double> probs_;
  std::vector<DensityOperator> states_;
};

/// Max over branch pairs of the trace distance of the reduced states on the
/// listed factors.
double marginal_constraint_defect(const SwitchSource& src, const std::vector<std::size_t>& subsystems);

struct AttackDemo {
  SwitchSource source;
  double chsh = 0.0;             ///< on the T=1 branch, Alice reading her flag
  double key_entropy = 0.0;      ///< H(Z_{A0}|E) on the T=0 branch, E purifying tau
  double marginal_defect = 0.0;  ///< on A0 A1
};

/// Factor order A0, A1, B, F (all qubits).
AttackDemo attack_example();

/// Forward direction: Gamma^t = id_A ⊗ Phi'^t on A ⊗ A'.
std::vector<Channel> embed_model_a_in_b(const std::vector<Channel>& phi_prime, std::size_t dim_a);

/// A switch-model instance: input tau^t on A ⊗ A' and Gamma^t : AA' → ABF.
struct ModelBInstance {
  std::vector<double> probs;
  std::vector<DensityOperator> inputs;
  std::vector<Channel> gammas;
  std::size_t dim_a = 2;
};

/// Channel-model instance acting only on A'T: Phi'^t : A' → BF and the common
/// input state on A ⊗ A'.
struct ModelAConversion {
  std::vector<Channel> phi_prime;
  DensityOperator input;
  std::vector<double> probs;
  std::vector<double> branch_errors;  ///< trace norm of id⊗Phi'^t(input) - Gamma^t(tau^t)
  double total_error = 0.0;           ///< same for the T-averaged output
  double marginal_defect = 0.0;
};

/// Converse direction via a common purification and Uhlmann isometries.
/// Throws MarginalMismatch when the A-marginals of the branch outputs differ
/// by more than `tol`.
ModelAConversion convert_model_b_to_a(const ModelBInstance& model, double tol = 1e-8);

/// Random instance Gamma^t = (id_A ⊗ Lambda^t) ∘ N with N : AA' → AR fixed and
/// a common input, so the marginal constraint holds by construction.
ModelBInstance random_model_b(std::size_t branches, std::size_t dim, Rng& rng);

/// p(a, b | x, y) for binary inputs and outputs.
class Behavior {
 public:
  using Table = std::array<double, 16>;

  explicit Behavior(const Table& probs, double tol = kStructuralTol);

  double operator()(int a, int b, int x, int y) const { return probs_[index(a, b, x, y)]; }
  const Table& table() const { return probs_; }
  /// sum_{a,b} (-1)^(a+b) p(a,b|x,y)
  double correlator(int x, int y) const;

  static std::size_t index(int a, int b, int x, int y) {
    return static_cast<std::size_t>(((a * 2 + b) * 2 + x) * 2 + y);
  }
  /// Lines of "x y a b p"; '#' starts a comment.
  static Behavior parse(const std::string& text);
  std::string to_text() const;

  /// Born-rule statistics of rho on A ⊗ B (extra factors traced implicitly by
  /// embedding the observables on the first two sites).
  static Behavior from_state(const DensityOperator& rho, const std::array<Reflection, 2>& alice,
                             const std::array<Reflection, 2>& bob);
  /// Local deterministic strategy a = fa[x], b = fb[y].
  static Behavior deterministic(std::array<int, 2> fa, std::array<int, 2> fb);
  /// Ideal CHSH statistics mixed with white noise: correlators scaled by v.
  static Behavior isotropic(double visibility);

 private:
  Table probs_;
};

struct LhvResult {
  bool feasible = false;
  std::array<double, 16> weights{};  ///< over deterministic vertices, index (fa0,fa1,fb0,fb1) bits
  double residual = 0.0;
  double facet_value = 0.0;  ///< max over the eight CHSH facets
};

/// Convex decomposition over the 16 deterministic behaviors by nonnegative
/// least squares; feasible when the residual is at most `tol`.
LhvResult lhv_membership(const Behavior& b, double tol = 1e-8);

/// max over the eight CHSH expressions of the behavior's correlators.
double chsh_facet_value(const Behavior& b);

/// Lawson–Hanson nonnegative least squares: argmin ||A x - b|| with x >= 0.
Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int max_iter = 500);

}  // namespace rbqkd
