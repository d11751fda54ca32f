#include "rbqkd/lift.hpp"

#include "rbqkd/entropy.hpp"
#include "rbqkd/optimize.hpp"

#include <cmath>
#include <sstream>
#include <thread>

namespace rbqkd {

namespace {

ComplexMatrix ket_bra(std::size_t d, std::size_t i, std::size_t j) {
  return basis_vector(d, i) * basis_vector(d, j).adjoint();
}

ComplexMatrix cnot() {
  return kron(ket_bra(2, 0, 0), pauli::identity()) + kron(ket_bra(2, 1, 1), pauli::x());
}

ComplexMatrix rotation(double angle) {
  ComplexMatrix r(2, 2);
  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0);
  r << c, -s, s, c;
  return r;
}

std::size_t aux_dim(const Isometry& iso, std::size_t ideal_dim) { return iso.codomain_dim() / ideal_dim; }

// (I_first ⊗ I_partner) v, reordered from (ideal1, aux1, ideal2, aux2) to
// (ideal1, ideal2, aux1, aux2).
ComplexVector lift_vector(const DilationPair& dp, const ComplexVector& v) {
  const std::size_t d1 = dp.ideal_dim_first();
  const std::size_t d2 = dp.ideal_dim_partner();
  const Dims dims{d1, aux_dim(dp.iso_first, d1), d2, aux_dim(dp.iso_partner, d2)};
  const ComplexVector lifted = kron(dp.iso_first.matrix(), dp.iso_partner.matrix()) * v;
  return permute_subsystems(lifted, dims, {0, 2, 1, 3});
}

Strategy conjugate(const Strategy& s, const ComplexMatrix& u_first, const ComplexMatrix& u_partner) {
  const ComplexVector psi = kron(u_first, u_partner) * s.state().amplitudes();
  auto conj = [](const ComplexMatrix& u, const Reflection& r) {
    return Reflection(hermitian_part(ComplexMatrix(u * r.matrix() * u.adjoint())));
  };
  return Strategy(PureState::normalized(psi, s.state().dims()),
                  {conj(u_first, s.alice(0)), conj(u_first, s.alice(1))},
                  {conj(u_partner, s.partner(0)), conj(u_partner, s.partner(1))});
}

}  // namespace

DilationDefects DilationPair::measured() const {
  DilationDefects d;
  const ComplexVector& psi = physical.state().amplitudes();
  const ComplexVector& ideal_psi = ideal.state().amplitudes();
  const ComplexVector& junk = aux.amplitudes();
  d.state = (lift_vector(*this, psi) - kron(ideal_psi, junk)).norm();
  const auto dp = static_cast<Eigen::Index>(physical.dim_p());
  const auto da = static_cast<Eigen::Index>(physical.dim_a());
  const auto ip = static_cast<Eigen::Index>(ideal.dim_p());
  const auto ia = static_cast<Eigen::Index>(ideal.dim_a());
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t a = 0; a < 2; ++a) {
      const ComplexVector phys = kron(physical.alice(x).effect(a), ComplexMatrix::Identity(dp, dp)) * psi;
      const ComplexVector id = kron(ideal.alice(x).effect(a), ComplexMatrix::Identity(ip, ip)) * ideal_psi;
      d.first = std::max(d.first, (lift_vector(*this, phys) - kron(id, junk)).norm());
      const ComplexVector phys_p = kron(ComplexMatrix::Identity(da, da), physical.partner(x).effect(a)) * psi;
      const ComplexVector id_p = kron(ComplexMatrix::Identity(ia, ia), ideal.partner(x).effect(a)) * ideal_psi;
      d.partner = std::max(d.partner, (lift_vector(*this, phys_p) - kron(id_p, junk)).norm());
    }
  return d;
}

DensityOperator DilationPair::first_marginal() const {
  const DensityOperator rho(physical.state());
  return partial_trace(rho, {0});
}

DilationPair build_test_dilation(double angle, double leak) {
  if (!(leak >= 0.0 && leak < 1.0)) throw DomainError("leak must lie in [0, 1)");
  if (!std::isfinite(angle)) throw DomainError("angle must be finite");
  const Strategy ideal = ideal_strategy();
  const ComplexVector aux00 = basis_vector(4, 0);
  const ComplexVector aux11 = basis_vector(4, 3);
  // (qubit_1, qubit_2, aux_1, aux_2) then regrouped per party.
  const ComplexVector raw = std::sqrt(1.0 - leak) * kron(ideal.state().amplitudes(), aux00) +
                            std::sqrt(leak) * kron(basis_vector(4, 0), aux11);
  const ComplexVector psi = permute_subsystems(raw, Dims{2, 2, 2, 2}, {0, 2, 1, 3});

  const ComplexMatrix r = rotation(angle);
  const ComplexMatrix p0 = ket_bra(2, 0, 0);
  const ComplexMatrix p1 = ket_bra(2, 1, 1);
  auto first = [&](std::size_t x) {
    return Reflection(hermitian_part(ComplexMatrix(kron(ComplexMatrix(r * ideal.alice(x).matrix() * r.adjoint()), p0) +
                                                   kron(pauli::z(), p1))));
  };
  auto partner = [&](std::size_t y) { return Reflection(kron(ideal.partner(y).matrix(), p0) + kron(pauli::z(), p1)); };
  Strategy physical(PureState(psi, Dims{4, 4}), {first(0), first(1)}, {partner(0), partner(1)});

  DilationPair dp{std::move(physical), ideal, Isometry::identity(4), Isometry::identity(4),
                  PureState(aux00, Dims{2, 2}), 0.0, leak, false};
  dp.epsilon = dp.measured().max();
  return dp;
}

DilationPair build_flag_dilation(double angle, double leak) {
  DilationPair base = build_test_dilation(angle, leak);
  const ComplexMatrix c = cnot();
  Strategy physical = conjugate(base.physical, c, c);
  DilationPair dp{std::move(physical), base.ideal, Isometry(c.adjoint()), Isometry(c.adjoint()), base.aux, 0.0, leak, true};
  dp.epsilon = dp.measured().max();
  return dp;
}

DilationPair dilation_with_epsilon(double target, Rng& rng) {
  if (!(target >= 0.0)) throw DomainError("target epsilon must be nonnegative");
  if (target == 0.0) return build_test_dilation(0.0, 0.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double leak = 0.6 * target * target * unif(rng);
  double lo = 0.0;
  double hi = 0.2;
  if (build_test_dilation(lo, leak).epsilon > target) throw DomainError("leak alone exceeds the target epsilon");
  if (build_test_dilation(hi, leak).epsilon < target) {
    DilationPair dp = build_test_dilation(hi, leak);
    dp.epsilon = target;
    return dp;
  }
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    if (build_test_dilation(mid, leak).epsilon <= target)
      lo = mid;
    else
      hi = mid;
  }
  DilationPair dp = build_test_dilation(lo, leak);
  dp.epsilon = target;
  return dp;
}

DensityOperator random_compatible_state(const DilationPair& dp_a, const DilationPair& dp_b, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double la = dp_a.leak;
  const double lb = dp_b.leak;
  const double c_lo = std::max(0.0, la + lb - 1.0);
  const double c_hi = std::min(la, lb);
  const double q11 = c_lo + (c_hi - c_lo) * unif(rng);
  const double q10 = la - q11;
  const double q01 = lb - q11;
  const double q00 = 1.0 - la - lb + q11;

  // Bell-diagonal state for the unflagged sector.
  std::array<double, 4> w{};
  double total = 0.0;
  for (double& x : w) total += (x = unif(rng));
  const std::array<ComplexMatrix, 4> paulis{pauli::identity(), pauli::x(), pauli::y(), pauli::z()};
  const ComplexMatrix omega = maximally_entangled(2).projector();
  ComplexMatrix bell = ComplexMatrix::Zero(4, 4);
  for (std::size_t k = 0; k < 4; ++k) {
    const ComplexMatrix u = kron(pauli::identity(), paulis[k]);
    bell += (w[k] / total) * u * omega * u.adjoint();
  }
  const ComplexMatrix half = pauli::identity() / 2.0;
  const ComplexMatrix zero = ket_bra(2, 0, 0);
  // Sectors on (qubit_A, qubit_B, aux_A, aux_B).
  ComplexMatrix sigma = q00 * kron(bell, ket_bra(4, 0, 0)) + q11 * kron(kron(zero, zero), ket_bra(4, 3, 3)) +
                        q10 * kron(kron(zero, half), ket_bra(4, 2, 2)) + q01 * kron(kron(half, zero), ket_bra(4, 1, 1));
  sigma = permute_subsystems(sigma, Dims{2, 2, 2, 2}, {0, 2, 1, 3});
  const ComplexMatrix c = cnot();
  const ComplexMatrix id4 = ComplexMatrix::Identity(4, 4);
  const ComplexMatrix u = kron(dp_a.flagged ? c : id4, dp_b.flagged ? c : id4);
  sigma = u * sigma * u.adjoint();

  const double lambda = 0.5 * unif(rng);
  const ComplexMatrix product = kron(dp_a.first_marginal().matrix(), dp_b.first_marginal().matrix());
  return DensityOperator::from_unnormalized((1.0 - lambda) * sigma + lambda * product, Dims{4, 4});
}

DensityOperator compress_state(const DensityOperator& rho_ab, const Isometry& iso_a, const Isometry& iso_b,
                               std::size_t ideal_dim_a, std::size_t ideal_dim_b) {
  const Dims& dims = rho_ab.system_dims();
  if (dims.size() != 2 || dims[0] != iso_a.domain_dim() || dims[1] != iso_b.domain_dim())
    throw DimensionMismatch("isometry domains do not match the state's factors");
  if (iso_a.codomain_dim() % ideal_dim_a != 0 || iso_b.codomain_dim() % ideal_dim_b != 0)
    throw DimensionMismatch("isometry codomain is not ideal ⊗ aux");
  const ComplexMatrix v = kron(iso_a.matrix(), iso_b.matrix());
  const ComplexMatrix lifted = v * rho_ab.matrix() * v.adjoint();
  const Dims out{ideal_dim_a, aux_dim(iso_a, ideal_dim_a), ideal_dim_b, aux_dim(iso_b, ideal_dim_b)};
  return DensityOperator::from_unnormalized(partial_trace(lifted, out, {0, 2}), Dims{ideal_dim_a, ideal_dim_b});
}

double dilation_marginal_defect(const DilationPair& dp_a, const DilationPair& dp_b, const DensityOperator& rho_ab) {
  const DensityOperator ra = partial_trace(rho_ab, {0});
  const DensityOperator rb = partial_trace(rho_ab, {1});
  const DensityOperator pa = dp_a.first_marginal();
  const DensityOperator pb = dp_b.first_marginal();
  if (ra.dim() != pa.dim() || rb.dim() != pb.dim()) throw DimensionMismatch("state factors differ from the dilations");
  return std::max(trace_distance(ra.matrix(), pa.matrix()), trace_distance(rb.matrix(), pb.matrix()));
}

namespace {

double require_marginals(const DilationPair& dp_a, const DilationPair& dp_b, const DensityOperator& rho_ab, double tol) {
  const double defect = dilation_marginal_defect(dp_a, dp_b, rho_ab);
  if (defect > tol) {
    std::ostringstream msg;
    msg << "state marginals differ from the physical marginals by " << defect;
    throw MarginalMismatch(msg.str());
  }
  return defect;
}

}  // namespace

CompressionCheck verify_compression(const DilationPair& dp_a, const DilationPair& dp_b, const DensityOperator& rho_ab,
                                    double tol) {
  CompressionCheck out;
  out.marginal_defect = require_marginals(dp_a, dp_b, rho_ab, tol);
  const DensityOperator compressed =
      compress_state(rho_ab, dp_a.iso_first, dp_b.iso_first, dp_a.ideal_dim_first(), dp_b.ideal_dim_first());
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t y = 0; y < 2; ++y)
      for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b) {
          const double phys =
              expectation(rho_ab, kron(dp_a.physical.alice(x).effect(a), dp_b.physical.alice(y).effect(b)));
          const double ideal =
              expectation(compressed, kron(dp_a.ideal.alice(x).effect(a), dp_b.ideal.alice(y).effect(b)));
          out.deviation = std::max(out.deviation, std::abs(phys - ideal));
        }
  out.bound = 3.0 * (dp_a.epsilon + dp_b.epsilon);
  return out;
}

EntropyTransferCheck verify_entropy_transfer(const DilationPair& dp_a, const DilationPair& dp_b,
                                             const DensityOperator& rho_ab, std::size_t x_tilde, double tol) {
  if (x_tilde > 1) throw DomainError("binary key setting expected");
  EntropyTransferCheck out;
  out.marginal_defect = require_marginals(dp_a, dp_b, rho_ab, tol);
  out.lhs = conditional_entropy(measure_to_cq(rho_ab, dp_a.physical.alice(x_tilde).pvm(), 0, Conditioning::Purifier));

  // The lifted purification is pure on (A~ B~)(aux_A aux_B E), so
  // H(A~|E') = S(pinched rho_A~B~) - S(rho_A~B~) on the compressed state.
  const DensityOperator compressed =
      compress_state(rho_ab, dp_a.iso_first, dp_b.iso_first, dp_a.ideal_dim_first(), dp_b.ideal_dim_first());
  out.rhs = lift_objective(compressed, dp_a.ideal.alice(x_tilde).pvm());

  const double alphabet = 2.0;
  out.continuity = continuity_f(alphabet * dp_a.epsilon, 2);
  out.slack = out.lhs - (out.rhs - out.continuity);
  return out;
}

LiftMeasurements ideal_lift_measurements() {
  const Strategy s = ideal_strategy();
  return LiftMeasurements{{s.alice(0).pvm(), s.alice(1).pvm()}, {s.partner(0).pvm(), s.partner(1).pvm()}};
}

Behavior bb84_behavior(double qber) {
  if (!(qber >= 0.0 && qber <= 0.5)) throw DomainError("QBER must lie in [0, 1/2]");
  const double v = 1.0 - 2.0 * qber;
  const ComplexMatrix rho = v * maximally_entangled(2).projector() + (1.0 - v) * ComplexMatrix::Identity(4, 4) / 4.0;
  const LiftMeasurements m = ideal_lift_measurements();
  return Behavior::from_state(DensityOperator(rho, Dims{2, 2}),
                              {Reflection::from_pvm(m.alice[0]), Reflection::from_pvm(m.alice[1])},
                              {Reflection::from_pvm(m.bob[0]), Reflection::from_pvm(m.bob[1])});
}

namespace {

constexpr double kLn2 = 0.69314718055994530942;

ComplexMatrix pinch(const ComplexMatrix& rho, const BinaryPvm& key) {
  const auto d = rho.rows() / key.dim();
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  const ComplexMatrix m0 = kron(key.effect(0), id);
  const ComplexMatrix m1 = kron(key.effect(1), id);
  return m0 * rho * m0 + m1 * rho * m1;
}

struct SpectralLog {
  double entropy = 0.0;
  ComplexMatrix log;
};

SpectralLog spectral_log(const ComplexMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(rho));
  SpectralLog out;
  RealVector logs(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < logs.size(); ++i) {
    const double lam = std::max(es.eigenvalues()(i), 0.0);
    if (lam > 0.0) out.entropy -= lam * std::log2(lam);
    logs(i) = std::log(std::max(lam, 1e-300));
  }
  out.log = es.eigenvectors() * logs.asDiagonal() * es.eigenvectors().adjoint();
  return out;
}

constexpr Eigen::Index kLiftDim = 4;
constexpr Eigen::Index kParams = 16;

ComplexMatrix factor_from_params(const Eigen::VectorXd& theta) {
  ComplexMatrix l = ComplexMatrix::Zero(kLiftDim, kLiftDim);
  Eigen::Index k = kLiftDim;
  for (Eigen::Index i = 0; i < kLiftDim; ++i) {
    l(i, i) = theta(i);
    for (Eigen::Index j = 0; j < i; ++j, k += 2) l(i, j) = cplx(theta(k), theta(k + 1));
  }
  return l;
}

// Gradient with respect to theta of tr[G rho] through rho = L L† / tr(L L†).
Eigen::VectorXd pull_back(const ComplexMatrix& g, const ComplexMatrix& l, const ComplexMatrix& rho, double t) {
  const ComplexMatrix shifted =
      (g - (g * rho).trace().real() * ComplexMatrix::Identity(kLiftDim, kLiftDim)) / t;
  const ComplexMatrix gl = shifted * l;
  Eigen::VectorXd out(kParams);
  Eigen::Index k = kLiftDim;
  for (Eigen::Index i = 0; i < kLiftDim; ++i) {
    out(i) = 2.0 * gl(i, i).real();
    for (Eigen::Index j = 0; j < i; ++j, k += 2) {
      out(k) = 2.0 * gl(i, j).real();
      out(k + 1) = 2.0 * gl(i, j).imag();
    }
  }
  return out;
}

struct RestartOutcome {
  double entropy = 0.0;
  double residual = 0.0;
  ComplexMatrix rho;
};

RestartOutcome run_restart(const LiftProblem& p, const std::vector<ComplexMatrix>& pis, const std::vector<double>& targets,
                           const RelaxedOptions& opts, std::size_t restart) {
  const BinaryPvm& key = p.measurements.alice[p.key_setting];
  const opt::Objective objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
    const ComplexMatrix l = factor_from_params(theta);
    const ComplexMatrix llh = l * l.adjoint();
    const double t = llh.trace().real();
    if (!(t > 1e-300)) {
      grad = Eigen::VectorXd::Zero(kParams);
      return std::numeric_limits<double>::infinity();
    }
    const ComplexMatrix rho = llh / t;
    const SpectralLog s = spectral_log(rho);
    const SpectralLog sp = spectral_log(pinch(rho, key));
    grad = pull_back(ComplexMatrix((s.log - sp.log) / kLn2), l, rho, t);
    return sp.entropy - s.entropy;
  };
  const opt::Constraints constraints = [&](const Eigen::VectorXd& theta, Eigen::MatrixXd& jac) {
    const ComplexMatrix l = factor_from_params(theta);
    const ComplexMatrix llh = l * l.adjoint();
    const double t = std::max(llh.trace().real(), 1e-300);
    const ComplexMatrix rho = llh / t;
    const auto n = static_cast<Eigen::Index>(pis.size());
    Eigen::VectorXd c(2 * n);
    jac.resize(2 * n, kParams);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double dev = (rho * pis[static_cast<std::size_t>(j)]).trace().real() - targets[static_cast<std::size_t>(j)];
      const Eigen::VectorXd gj = pull_back(pis[static_cast<std::size_t>(j)], l, rho, t);
      c(2 * j) = dev - p.eps_prob;
      c(2 * j + 1) = -dev - p.eps_prob;
      jac.row(2 * j) = gj.transpose();
      jac.row(2 * j + 1) = -gj.transpose();
    }
    return c;
  };

  Rng rng(splitmix(opts.seed, restart));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd theta(kParams);
  for (Eigen::Index i = 0; i < kParams; ++i) theta(i) = normal(rng);

  opt::AugLagOptions al;
  al.penalty = opts.penalty;
  const opt::AugLagResult res = opt::augmented_lagrangian(objective, constraints, theta, al);
  const ComplexMatrix l = factor_from_params(res.x);
  const ComplexMatrix llh = l * l.adjoint();
  RestartOutcome out;
  out.rho = hermitian_part(ComplexMatrix(llh / llh.trace().real()));
  out.entropy = lift_objective(DensityOperator(out.rho, Dims{2, 2}), key);
  out.residual = lift_residual(p, out.rho);
  return out;
}

}  // namespace

double lift_objective(const DensityOperator& rho, const BinaryPvm& key_pvm) {
  if (rho.dim() % key_pvm.dim() != 0) throw DimensionMismatch("measurement does not act on the first factor");
  return von_neumann(pinch(rho.matrix(), key_pvm)) - von_neumann(rho);
}

double lift_residual(const LiftProblem& p, const ComplexMatrix& rho) {
  double worst = 0.0;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const ComplexMatrix pi = kron(p.measurements.alice[x].effect(a), p.measurements.bob[y].effect(b));
          const double dev = std::abs((rho * pi).trace().real() - p.target(a, b, x, y));
          worst = std::max(worst, dev - p.eps_prob);
        }
  return std::max(worst, 0.0);
}

RelaxedSolution solve_relaxed_opt(const LiftProblem& p, const RelaxedOptions& opts) {
  if (opts.restarts == 0) throw DomainError("at least one restart is required");
  if (!(p.eps_prob >= 0.0)) throw DomainError("eps_prob must be nonnegative");
  if (p.key_setting > 1) throw DomainError("binary key setting expected");
  for (const auto& m : p.measurements.alice)
    if (m.dim() != 2) throw DimensionMismatch("ideal measurements must act on qubits");
  for (const auto& m : p.measurements.bob)
    if (m.dim() != 2) throw DimensionMismatch("ideal measurements must act on qubits");

  std::vector<ComplexMatrix> pis;
  std::vector<double> targets;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          pis.push_back(kron(p.measurements.alice[x].effect(a), p.measurements.bob[y].effect(b)));
          targets.push_back(p.target(a, b, x, y));
        }

  std::vector<RestartOutcome> outcomes(opts.restarts);
  std::size_t workers = opts.workers ? opts.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, opts.restarts);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t r = w; r < opts.restarts; r += workers) outcomes[r] = run_restart(p, pis, targets, opts, r);
    });
  }
  for (auto& t : pool) t.join();

  RelaxedSolution best;
  bool found = false;
  double best_residual = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    best_residual = std::min(best_residual, outcomes[r].residual);
    if (outcomes[r].residual > opts.residual_tol) continue;
    ++best.feasible_restarts;
    if (!found || outcomes[r].entropy < best.entropy) {
      found = true;
      best.entropy = outcomes[r].entropy;
      best.residual = outcomes[r].residual;
      best.best_restart = r;
    }
  }
  if (!found) {
    std::ostringstream msg;
    msg << "no restart met the residual tolerance; smallest residual " << best_residual;
    throw NoFeasiblePoint(msg.str());
  }
  best.state = DensityOperator(outcomes[best.best_restart].rho, Dims{2, 2});
  return best;
}

ReductionResult reduction_chain(const Behavior& p, double eps_a, double eps_b, std::size_t x_tilde,
                                const RelaxedOptions& opts, double extra_slack) {
  if (!(eps_a >= 0.0 && eps_b >= 0.0 && extra_slack >= 0.0)) throw DomainError("dilation errors must be nonnegative");
  ReductionResult out;
  out.eps_prob = 3.0 * (eps_a + eps_b) + extra_slack;
  LiftProblem problem{p, out.eps_prob, x_tilde, ideal_lift_measurements()};
  out.solution = solve_relaxed_opt(problem, opts);
  out.relaxed = out.solution.entropy;
  out.continuity = continuity_f(2.0 * eps_a, 2);
  out.value = out.relaxed - out.continuity;
  return out;
}

}  // namespace rbqkd
