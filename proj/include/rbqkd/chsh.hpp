// CHSH game: strategies, values, sum-of-squares defects and the robust
// self-testing error constants.
#pragma once

#include "rbqkd/core.hpp"

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace rbqkd {

/// A bipartite state on H_A ⊗ H_P with two reflections per party.
class Strategy {
 public:
  Strategy(PureState state, std::array<Reflection, 2> alice, std::array<Reflection, 2> partner);

  const PureState& state() const { return state_; }
  const Reflection& alice(std::size_t x) const { return alice_.at(x); }
  const Reflection& partner(std::size_t y) const { return partner_.at(y); }
  std::size_t dim_a() const { return state_.dims()[0]; }
  std::size_t dim_p() const { return state_.dims()[1]; }

  /// <A_x ⊗ B_y>
  double correlator(std::size_t x, std::size_t y) const;

 private:
  PureState state_;
  std::array<Reflection, 2> alice_;
  std::array<Reflection, 2> partner_;
};

inline constexpr int kMeasurementConstant = 111;
inline constexpr int kStateConstant = 95;

/// Dilation errors implied by a CHSH deficit, with the intermediate chain.
struct DilationBudget {
  double epsilon = 0.0;
  double delta_meas = 0.0;   ///< 111 sqrt(eps)
  double delta_state = 0.0;  ///< 95 sqrt(eps)

  double root128 = 0.0;         ///< 128^(1/4)
  double one_plus_sqrt2 = 0.0;  ///< 1 + sqrt 2
  double delta = 0.0;           ///< 4 (1 + sqrt2) 128^(1/4) sqrt(eps)
  double gap = 0.0;             ///< 1 / (2 sqrt 2)

  /// Per-sqrt(eps) coefficients of the state and measurement bounds, with and
  /// without the leading sqrt 2 in front of (delta + sqrt eps) / gap.
  double state_coeff_with_sqrt2 = 0.0;
  double state_coeff = 0.0;
  double meas_coeff_with_sqrt2 = 0.0;
  double meas_coeff = 0.0;
};

double chsh_correlator(const Strategy& s);
/// 1/2 + correlator / 8.
double chsh_game_value(const Strategy& s);

/// Maximally entangled qubits, Alice (X, Z), partner ((X+Z)/sqrt2, (X-Z)/sqrt2).
Strategy ideal_strategy();

/// Norms of (A_0 - (B_0 + B_1)/sqrt2)|psi> and (A_1 - (B_0 - B_1)/sqrt2)|psi>.
std::pair<double, double> sos_defects(const Strategy& s);

/// ||(1 ⊗ {B_0, B_1})|psi>||
double anticommutator_defect(const Strategy& s);

DilationBudget dilation_budget(double epsilon);

/// Distinct eigenvalues of 1/2 + (sqrt2/8)(X⊗X + Z⊗Z), descending.
std::array<double, 3> spectral_check_game_operator();

/// Human-readable derivation table.
std::vector<std::pair<std::string, double>> dilation_table(const DilationBudget& b);

}  // namespace rbqkd
