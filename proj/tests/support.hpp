// Small helpers shared by the unit tests.
#pragma once

#include "rbqkd/chsh.hpp"
#include "rbqkd/core.hpp"
#include "rbqkd/random.hpp"

#include <cmath>

namespace rbqkd::test {

inline double h2(double q) {
  if (q <= 0.0 || q >= 1.0) return 0.0;
  return -q * std::log2(q) - (1.0 - q) * std::log2(1.0 - q);
}

inline double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

/// (1 ± n.sigma)/2 projector onto a Bloch direction in the X–Z plane.
inline ComplexMatrix qubit_projector(double t) {
  return (pauli::identity() + pauli::xz_plane(t)) / 2.0;
}

/// S(rho) from eigenvalues, computed here rather than by the library.
inline double entropy_bits(const ComplexMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho);
  double s = 0.0;
  for (double l : es.eigenvalues())
    if (l > 1e-15) s -= l * std::log2(l);
  return s;
}

/// Near-optimal CHSH strategy of local dimension d >= 2: a partially
/// entangled qubit pair with perturbed X–Z plane observables, the remaining
/// levels fixed by +-1, all conjugated by random local unitaries. `spread`
/// controls the distance from the ideal strategy.
inline Strategy random_strategy(std::size_t d, double spread, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double pi = std::acos(-1.0);
  const double t = pi / 4.0 + spread * 0.5 * u(rng);
  ComplexVector amp = ComplexVector::Zero(static_cast<Eigen::Index>(d * d));
  amp(0) = std::cos(t);
  amp(static_cast<Eigen::Index>(d + 1)) = std::sin(t);
  const ComplexMatrix ua = random_unitary(d, rng);
  const ComplexMatrix ub = random_unitary(d, rng);
  const auto lift = [&](double angle, const ComplexMatrix& uu) {
    ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    m.topLeftCorner(2, 2) = pauli::xz_plane(angle);
    for (std::size_t k = 2; k < d; ++k) m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = (k % 2) ? 1.0 : -1.0;
    return Reflection(hermitian_part(ComplexMatrix(uu * m * uu.adjoint())));
  };
  const std::array<double, 4> ideal = {pi / 2.0, 0.0, pi / 4.0, 3.0 * pi / 4.0};
  std::array<double, 4> ang{};
  for (std::size_t i = 0; i < 4; ++i) ang[i] = ideal[i] + spread * u(rng);
  const PureState psi(kron(ua, ub) * amp, {d, d});
  return Strategy(psi, {lift(ang[0], ua), lift(ang[1], ua)}, {lift(ang[2], ub), lift(ang[3], ub)});
}

}  // namespace rbqkd::test
