#include "rbqkd/chsh.hpp"

#include <cmath>

namespace rbqkd {

namespace {

ComplexMatrix on_alice(const Strategy& s, const ComplexMatrix& op) {
  const auto dp = static_cast<Eigen::Index>(s.dim_p());
  return kron(op, ComplexMatrix::Identity(dp, dp));
}

ComplexMatrix on_partner(const Strategy& s, const ComplexMatrix& op) {
  const auto da = static_cast<Eigen::Index>(s.dim_a());
  return kron(ComplexMatrix::Identity(da, da), op);
}

}  // namespace

Strategy::Strategy(PureState state, std::array<Reflection, 2> alice, std::array<Reflection, 2> partner)
    : state_(std::move(state)), alice_(std::move(alice)), partner_(std::move(partner)) {
  if (state_.dims().size() != 2) throw DimensionMismatch("strategy state must be bipartite");
  for (const auto& a : alice_)
    if (a.dim() != dim_a()) throw DimensionMismatch("Alice observable does not act on H_A");
  for (const auto& b : partner_)
    if (b.dim() != dim_p()) throw DimensionMismatch("partner observable does not act on H_P");
}

double Strategy::correlator(std::size_t x, std::size_t y) const {
  return expectation(state_, kron(alice(x).matrix(), partner(y).matrix()));
}

double chsh_correlator(const Strategy& s) {
  return s.correlator(0, 0) + s.correlator(0, 1) + s.correlator(1, 0) - s.correlator(1, 1);
}

double chsh_game_value(const Strategy& s) { return 0.5 + chsh_correlator(s) / 8.0; }

Strategy ideal_strategy() {
  const double r = 1.0 / std::sqrt(2.0);
  return Strategy(maximally_entangled(2), {Reflection(pauli::x()), Reflection(pauli::z())},
                  {Reflection(r * (pauli::x() + pauli::z())), Reflection(r * (pauli::x() - pauli::z()))});
}

std::pair<double, double> sos_defects(const Strategy& s) {
  const double r = 1.0 / std::sqrt(2.0);
  const ComplexVector& psi = s.state().amplitudes();
  const ComplexMatrix b_sum = r * (s.partner(0).matrix() + s.partner(1).matrix());
  const ComplexMatrix b_diff = r * (s.partner(0).matrix() - s.partner(1).matrix());
  const double d0 = ((on_alice(s, s.alice(0).matrix()) - on_partner(s, b_sum)) * psi).norm();
  const double d1 = ((on_alice(s, s.alice(1).matrix()) - on_partner(s, b_diff)) * psi).norm();
  return {d0, d1};
}

double anticommutator_defect(const Strategy& s) {
  const ComplexMatrix ac = anticommutator(s.partner(0).matrix(), s.partner(1).matrix());
  return (on_partner(s, ac) * s.state().amplitudes()).norm();
}

DilationBudget dilation_budget(double epsilon) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw DomainError("CHSH deficit must be nonnegative");
  DilationBudget b;
  const double root_eps = std::sqrt(epsilon);
  b.epsilon = epsilon;
  b.delta_meas = kMeasurementConstant * root_eps;
  b.delta_state = kStateConstant * root_eps;
  b.root128 = std::pow(128.0, 0.25);
  b.one_plus_sqrt2 = 1.0 + std::sqrt(2.0);
  b.gap = 1.0 / (2.0 * std::sqrt(2.0));
  const double delta_coeff = 4.0 * b.one_plus_sqrt2 * b.root128;
  b.delta = delta_coeff * root_eps;
  b.state_coeff = (delta_coeff + 1.0) / b.gap;
  b.state_coeff_with_sqrt2 = std::sqrt(2.0) * b.state_coeff;
  const double lead = 2.0 * b.one_plus_sqrt2 * b.root128;
  b.meas_coeff = lead + b.state_coeff;
  b.meas_coeff_with_sqrt2 = lead + b.state_coeff_with_sqrt2;
  return b;
}

std::array<double, 3> spectral_check_game_operator() {
  const ComplexMatrix op = 0.5 * ComplexMatrix::Identity(4, 4) +
                           (std::sqrt(2.0) / 8.0) * (kron(pauli::x(), pauli::x()) + kron(pauli::z(), pauli::z()));
  RealVector ev = clamped_eigenvalues(op);
  std::vector<double> distinct;
  for (Eigen::Index i = ev.size(); i-- > 0;) {
    if (distinct.empty() || std::abs(distinct.back() - ev(i)) > 1e-9) distinct.push_back(ev(i));
  }
  if (distinct.size() != 3) throw DomainError("game operator does not have three distinct eigenvalues");
  return {distinct[0], distinct[1], distinct[2]};
}

std::vector<std::pair<std::string, double>> dilation_table(const DilationBudget& b) {
  return {
      {"epsilon", b.epsilon},
      {"root128", b.root128},
      {"one_plus_sqrt2", b.one_plus_sqrt2},
      {"delta", b.delta},
      {"gap", b.gap},
      {"state_coeff", b.state_coeff},
      {"state_coeff_with_sqrt2", b.state_coeff_with_sqrt2},
      {"meas_coeff", b.meas_coeff},
      {"meas_coeff_with_sqrt2", b.meas_coeff_with_sqrt2},
      {"delta_state", b.delta_state},
      {"delta_meas", b.delta_meas},
  };
}

}  // namespace rbqkd
