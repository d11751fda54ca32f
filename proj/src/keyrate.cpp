#include "rbqkd/keyrate.hpp"

#include "rbqkd/chsh.hpp"
#include "rbqkd/entropy.hpp"
#include "rbqkd/errors.hpp"

#include <algorithm>
#include <cmath>

namespace rbqkd {

namespace {

void require_qber(double q, const char* name) {
  if (!(q >= 0.0 && q <= 0.5)) throw DomainError(std::string(name) + " must lie in [0, 1/2]");
}

}  // namespace

void RateInputs::validate() const {
  if (!(omega >= 0.0 && omega <= 2.0 * std::sqrt(2.0) + 1e-12)) throw DomainError("omega must lie in [0, 2 sqrt 2]");
  if (!(marginal_eps >= 0.0)) throw DomainError("marginal slack must be nonnegative");
  require_qber(qber_x, "qber_x");
  require_qber(qber_z, "qber_z");
}

double routed_bb84_rate(const RateInputs& in) {
  in.validate();
  const double root = std::sqrt(std::max(0.0, 8.0 - in.omega * in.omega));
  return 1.0 - std::log2(1.0 + in.omega / 4.0 * root + in.marginal_eps) - binary_entropy(in.qber_z) -
         binary_entropy(in.qber_x);
}

std::vector<std::pair<std::string, double>> SelftestRate::table() const {
  return {{"k1", k1},
          {"k2", k2},
          {"eta", eta},
          {"kappa", kappa},
          {"anticomm_phi", anticomm_phi},
          {"anticomm_psi", anticomm_psi},
          {"second_moment", second_moment},
          {"cstar", cstar},
          {"neg_log2_cstar", neg_log2_cstar},
          {"constant", constant},
          {"rate", rate}};
}

SelftestRate selftest_rate(double epsilon, double qber_x, double qber_z, double k2, double k1) {
  if (!(epsilon >= 0.0)) throw DomainError("CHSH deficit must be nonnegative");
  if (!(k2 > 0.0) || !(k1 > 0.0)) throw DomainError("chain constants must be positive");
  require_qber(qber_x, "qber_x");
  require_qber(qber_z, "qber_z");
  const double root = std::sqrt(epsilon);
  SelftestRate r;
  r.k1 = k1;
  r.k2 = k2;
  r.eta = k1 * root;
  r.kappa = k2 * root;
  r.anticomm_phi = 2.0 * k2 * root;
  r.anticomm_psi = (2.0 * k2 + 2.0 * kStateConstant) * root;
  r.second_moment = r.anticomm_psi * r.anticomm_psi;
  r.cstar = std::min(1.0, 0.5 + 0.25 * std::sqrt(r.second_moment));
  r.neg_log2_cstar = -std::log2(r.cstar);
  // -log2(1/2 + a) >= 1 - 2a / ln 2
  r.constant = (k2 + kStateConstant) / std::log(2.0);
  r.rate = 1.0 - binary_entropy(qber_z) - binary_entropy(qber_x) - r.constant * root;
  r.secure = r.rate > 0.0;
  return r;
}

double devetak_winter(double h_z_given_e, double h_z_given_zb) { return h_z_given_e - h_z_given_zb; }

double fano_bound(double qber) {
  require_qber(qber, "qber");
  return binary_entropy(qber);
}

double shor_preskill_rate(double qber_x, double qber_z) {
  require_qber(qber_x, "qber_x");
  require_qber(qber_z, "qber_z");
  return 1.0 - binary_entropy(qber_x) - binary_entropy(qber_z);
}

double shor_preskill_threshold(double tol) {
  double lo = 0.0;
  double hi = 0.5;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (1.0 - 2.0 * binary_entropy(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace rbqkd
