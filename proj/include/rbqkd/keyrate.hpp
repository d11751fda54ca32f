// Closed-form asymptotic key rates, in bits per round.
#pragma once

#include <string>
#include <utility>
#include <vector>

namespace rbqkd {

struct RateInputs {
  double omega = 0.0;         ///< CHSH correlator
  double marginal_eps = 0.0;  ///< trace-distance slack on Alice's marginal
  double qber_x = 0.0;
  double qber_z = 0.0;

  /// Throws DomainError when a field is out of range.
  void validate() const;
};

/// 1 - log2(1 + (omega/4) sqrt(8 - omega^2) + eps) - h2(Q_Z) - h2(Q_X).
double routed_bb84_rate(const RateInputs& in);

struct SelftestRate {
  double rate = 0.0;
  bool secure = false;
  double constant = 0.0;  ///< C with rate = 1 - h2(Q_Z) - h2(Q_X) - C sqrt(eps)

  // Chain, each entry as a multiple of sqrt(eps) unless stated.
  double k1 = 0.0;
  double k2 = 0.0;
  double eta = 0.0;               ///< k1 sqrt(eps)
  double kappa = 0.0;             ///< k2 sqrt(eps)
  double anticomm_phi = 0.0;      ///< 2 k2 sqrt(eps)
  double anticomm_psi = 0.0;      ///< (2 k2 + 2 * 95) sqrt(eps)
  double second_moment = 0.0;     ///< anticomm_psi^2
  double cstar = 0.0;             ///< 1/2 + anticomm_psi / 4, capped at 1
  double neg_log2_cstar = 0.0;

  std::vector<std::pair<std::string, double>> table() const;
};

/// Rate from a CHSH deficit eps (game-value units) with an explicit constant
/// chain. k2 is the constant for the product bounds.
SelftestRate selftest_rate(double epsilon, double qber_x, double qber_z, double k2 = 222.0, double k1 = 111.0);

/// H(Z_A|E) - H(Z_A|Z_B), no clamping.
double devetak_winter(double h_z_given_e, double h_z_given_zb);

/// h2(Q) for Q in [0, 1/2].
double fano_bound(double qber);

/// 1 - h2(Q_X) - h2(Q_Z)
double shor_preskill_rate(double qber_x, double qber_z);

/// Root of 1 - 2 h2(Q) on (0, 1/2) by bisection.
double shor_preskill_threshold(double tol = 1e-12);

}  // namespace rbqkd
