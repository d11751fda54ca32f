#include "rbqkd/entropy.hpp"

#include <cmath>
#include <sstream>

namespace rbqkd {

namespace {

double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

void check_probs(const std::vector<double>& probs) {
  if (probs.empty()) throw DomainError("empty distribution");
  double total = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < -kStateTol) throw DomainError("negative or non-finite probability");
    total += p;
  }
  if (std::abs(total - 1.0) > kStateTol) throw DomainError("probabilities do not sum to 1");
}

}  // namespace

ClassicalDistribution::ClassicalDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
  check_probs(probs_);
  for (double& p : probs_) p = std::max(p, 0.0);
}

CqState::CqState(std::vector<double> probs, std::vector<std::optional<DensityOperator>> conditionals)
    : probs_(std::move(probs)), conditionals_(std::move(conditionals)) {
  check_probs(probs_);
  if (probs_.size() != conditionals_.size()) throw DimensionMismatch("one conditional state per outcome expected");
  bool have_dim = false;
  for (std::size_t a = 0; a < probs_.size(); ++a) {
    probs_[a] = std::max(probs_[a], 0.0);
    const auto& c = conditionals_[a];
    if (!c) {
      if (probs_[a] > kStateTol) throw DomainError("missing conditional state for a likely outcome");
      continue;
    }
    if (have_dim && c->dim() != e_dim_) throw DimensionMismatch("conditional states of unequal dimension");
    e_dim_ = c->dim();
    have_dim = true;
  }
  if (!have_dim) throw DomainError("cq state without any conditional state");
}

ComplexMatrix CqState::e_marginal() const {
  const auto d = static_cast<Eigen::Index>(e_dim_);
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  for (std::size_t a = 0; a < probs_.size(); ++a)
    if (conditionals_[a]) m += probs_[a] * conditionals_[a]->matrix();
  return m;
}

DensityOperator CqState::joint() const {
  const auto d = static_cast<Eigen::Index>(e_dim_);
  const auto n = static_cast<Eigen::Index>(probs_.size());
  ComplexMatrix m = ComplexMatrix::Zero(n * d, n * d);
  for (Eigen::Index a = 0; a < n; ++a) {
    const auto& c = conditionals_[static_cast<std::size_t>(a)];
    if (c) m.block(a * d, a * d, d, d) = probs_[static_cast<std::size_t>(a)] * c->matrix();
  }
  return DensityOperator::from_unnormalized(m, Dims{probs_.size(), e_dim_});
}

double binary_entropy(double q) {
  if (!(q >= 0.0 && q <= 1.0)) {
    std::ostringstream msg;
    msg << "binary entropy argument " << q << " outside [0, 1]";
    throw DomainError(msg.str());
  }
  return -xlog2x(q) - xlog2x(1.0 - q);
}

double shannon_entropy(const std::vector<double>& probs) {
  double h = 0.0;
  for (double p : probs) h -= xlog2x(p);
  return h;
}

double von_neumann(const ComplexMatrix& rho) {
  RealVector ev = clamped_eigenvalues(rho);
  double h = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) h -= xlog2x(ev(i));
  return h;
}

double von_neumann(const DensityOperator& rho) { return von_neumann(rho.matrix()); }

double conditional_entropy(const DensityOperator& rho_ae, const std::vector<std::size_t>& a_factors) {
  const auto& dims = rho_ae.system_dims();
  std::vector<bool> is_a(dims.size(), false);
  for (std::size_t k : a_factors) {
    if (k >= dims.size()) throw DimensionMismatch("A factor out of range");
    is_a[k] = true;
  }
  std::vector<std::size_t> e_factors;
  for (std::size_t f = 0; f < dims.size(); ++f)
    if (!is_a[f]) e_factors.push_back(f);
  const double h_ae = von_neumann(rho_ae);
  const double h_e = e_factors.empty() ? 0.0 : von_neumann(partial_trace(rho_ae.matrix(), dims, e_factors));
  return h_ae - h_e;
}

double conditional_entropy(const CqState& cq) {
  double h = shannon_entropy(cq.probs());
  for (std::size_t a = 0; a < cq.alphabet_size(); ++a)
    if (cq.conditionals()[a]) h += cq.probs()[a] * von_neumann(*cq.conditionals()[a]);
  return h - von_neumann(cq.e_marginal());
}

CqState measure_to_cq(const DensityOperator& rho, const BinaryPvm& pvm, std::size_t a_factor,
                      const std::vector<std::size_t>& e_factors) {
  const auto& dims = rho.system_dims();
  if (a_factor >= dims.size()) throw DimensionMismatch("measured factor out of range");
  if (pvm.dim() != dims[a_factor]) throw DimensionMismatch("measurement does not act on the measured factor");
  for (std::size_t e : e_factors)
    if (e == a_factor || e >= dims.size()) throw DimensionMismatch("invalid E factor");

  std::vector<double> probs;
  std::vector<std::optional<DensityOperator>> conditionals;
  for (std::size_t a = 0; a < 2; ++a) {
    const ComplexMatrix m = embed_operator(pvm.effect(a), dims, a_factor);
    const ComplexMatrix post = m * rho.matrix() * m;
    const double p = std::max(post.trace().real(), 0.0);
    probs.push_back(p);
    if (p <= kStateTol) {
      conditionals.emplace_back(std::nullopt);
      continue;
    }
    Dims e_dims;
    for (std::size_t e : e_factors) e_dims.push_back(dims[e]);
    if (e_factors.empty()) {
      conditionals.emplace_back(DensityOperator(ComplexMatrix::Identity(1, 1)));
    } else {
      conditionals.emplace_back(DensityOperator::from_unnormalized(partial_trace(post, dims, e_factors), e_dims));
    }
  }
  const double total = probs[0] + probs[1];
  for (double& p : probs) p /= total;
  return CqState(std::move(probs), std::move(conditionals));
}

CqState measure_to_cq(const DensityOperator& rho, const BinaryPvm& pvm, std::size_t a_factor, Conditioning conditioning) {
  const auto& dims = rho.system_dims();
  if (conditioning == Conditioning::Rest) {
    std::vector<std::size_t> rest;
    for (std::size_t f = 0; f < dims.size(); ++f)
      if (f != a_factor) rest.push_back(f);
    return measure_to_cq(rho, pvm, a_factor, rest);
  }
  const PureState psi = purify(rho);
  Dims full = dims;
  full.push_back(rho.dim());
  const DensityOperator joint(psi.projector(), full);
  return measure_to_cq(joint, pvm, a_factor, {full.size() - 1});
}

double relative_entropy(const ClassicalDistribution& q, const ClassicalDistribution& p) {
  if (q.size() != p.size()) throw DimensionMismatch("distributions over different alphabets");
  double d = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] <= 0.0) continue;
    if (p[i] <= 0.0) throw SupportViolation("support of q is not contained in support of p");
    d += q[i] * std::log2(q[i] / p[i]);
  }
  return std::max(d, 0.0);
}

double renyi_down(const CqState& cq, double alpha) {
  if (!(alpha > 1.0 && alpha <= 10.0)) throw DomainError("alpha must lie in (1, 10]");
  const double gamma = (1.0 - alpha) / (2.0 * alpha);
  const ComplexMatrix rho_e = cq.e_marginal();
  // gamma < 0: negative power on the support only.
  const ComplexMatrix sandwich = psd_function(rho_e, [gamma](double x) { return x > kStateTol ? std::pow(x, gamma) : 0.0; });
  double total = 0.0;
  for (std::size_t a = 0; a < cq.alphabet_size(); ++a) {
    const auto& c = cq.conditionals()[a];
    if (!c || cq.probs()[a] <= 0.0) continue;
    const ComplexMatrix inner = sandwich * (cq.probs()[a] * c->matrix()) * sandwich;
    RealVector ev = clamped_eigenvalues(inner);
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      if (ev(i) > 0.0) total += std::pow(ev(i), alpha);
  }
  return -std::log2(total) / (alpha - 1.0);
}

double continuity_f(double delta, std::size_t alphabet_size) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw DomainError("continuity parameter must be nonnegative");
  if (alphabet_size == 0) throw DomainError("alphabet must be nonempty");
  return delta * std::log2(static_cast<double>(alphabet_size)) + (1.0 + delta) * binary_entropy(delta / (1.0 + delta));
}

}  // namespace rbqkd
