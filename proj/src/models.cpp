#include "rbqkd/models.hpp"

#include "rbqkd/entropy.hpp"

#include <cmath>
#include <sstream>

namespace rbqkd {

namespace {

constexpr double kTraceTol = 1e-10;

ComplexMatrix ket_bra(std::size_t d, std::size_t i, std::size_t j) {
  return basis_vector(d, i) * basis_vector(d, j).adjoint();
}

// Minimal purification on (dim) ⊗ (padded rank).
PureState minimal_purification(const DensityOperator& rho, std::size_t min_env) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho.matrix());
  std::vector<Eigen::Index> support;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > 1e-14) support.push_back(i);
  const std::size_t env = std::max(support.size(), min_env);
  const auto d = static_cast<Eigen::Index>(rho.dim());
  const auto de = static_cast<Eigen::Index>(env);
  ComplexVector psi = ComplexVector::Zero(d * de);
  for (std::size_t k = 0; k < support.size(); ++k) {
    const double lam = es.eigenvalues()(support[k]);
    psi += std::sqrt(lam) * kron(ComplexVector(es.eigenvectors().col(support[k])),
                                 ComplexVector(ComplexVector::Unit(de, static_cast<Eigen::Index>(k))));
  }
  return PureState::normalized(psi, Dims{rho.dim(), env});
}

}  // namespace

Channel::Channel(std::vector<ComplexMatrix> kraus, Dims input_dims, Dims output_dims)
    : kraus_(std::move(kraus)), input_dims_(std::move(input_dims)), output_dims_(std::move(output_dims)) {
  if (kraus_.empty()) throw DomainError("channel needs at least one Kraus operator");
  const auto din = static_cast<Eigen::Index>(input_dim());
  const auto dout = static_cast<Eigen::Index>(output_dim());
  ComplexMatrix sum = ComplexMatrix::Zero(din, din);
  for (const auto& k : kraus_) {
    if (k.rows() != dout || k.cols() != din) throw DimensionMismatch("Kraus operator has the wrong shape");
    sum += k.adjoint() * k;
  }
  const double defect = (sum - ComplexMatrix::Identity(din, din)).cwiseAbs().maxCoeff();
  if (defect > kTraceTol) {
    std::ostringstream msg;
    msg << "Kraus operators violate trace preservation by " << defect;
    throw NotTracePreserving(msg.str());
  }
}

ComplexMatrix Channel::apply(const ComplexMatrix& rho) const {
  if (rho.rows() != static_cast<Eigen::Index>(input_dim())) throw DimensionMismatch("channel input dimension");
  const auto dout = static_cast<Eigen::Index>(output_dim());
  ComplexMatrix out = ComplexMatrix::Zero(dout, dout);
  for (const auto& k : kraus_) out += k * rho * k.adjoint();
  return out;
}

DensityOperator Channel::apply(const DensityOperator& rho) const {
  return DensityOperator::from_unnormalized(apply(rho.matrix()), output_dims_);
}

Channel Channel::with_identity_on_left(std::size_t left_dim) const {
  const auto d = static_cast<Eigen::Index>(left_dim);
  std::vector<ComplexMatrix> ks;
  for (const auto& k : kraus_) ks.push_back(kron(ComplexMatrix::Identity(d, d), k));
  Dims in{left_dim};
  in.insert(in.end(), input_dims_.begin(), input_dims_.end());
  Dims out{left_dim};
  out.insert(out.end(), output_dims_.begin(), output_dims_.end());
  return Channel(std::move(ks), std::move(in), std::move(out));
}

Channel Channel::after(const Channel& other) const {
  if (other.output_dim() != input_dim()) throw DimensionMismatch("channels do not compose");
  std::vector<ComplexMatrix> ks;
  for (const auto& k : kraus_)
    for (const auto& l : other.kraus_) ks.push_back(k * l);
  return Channel(std::move(ks), other.input_dims_, output_dims_);
}

Channel Channel::from_isometry(const ComplexMatrix& v, Dims input_dims, Dims output_dims) {
  const auto dout = static_cast<Eigen::Index>(dims_product(output_dims));
  if (dout == 0 || v.rows() % dout != 0) throw DimensionMismatch("isometry rows are not a multiple of the output dimension");
  const Eigen::Index env = v.rows() / dout;
  std::vector<ComplexMatrix> ks;
  for (Eigen::Index e = 0; e < env; ++e) {
    ComplexMatrix k(dout, v.cols());
    for (Eigen::Index o = 0; o < dout; ++o) k.row(o) = v.row(o * env + e);
    ks.push_back(std::move(k));
  }
  return Channel(std::move(ks), std::move(input_dims), std::move(output_dims));
}

Channel Channel::random(const Dims& input_dims, const Dims& output_dims, std::size_t kraus_count, Rng& rng) {
  const Isometry v = random_isometry(dims_product(input_dims), dims_product(output_dims) * kraus_count, rng);
  return from_isometry(v.matrix(), input_dims, output_dims);
}

SwitchSource::SwitchSource(std::vector<double> branch_probs, std::vector<DensityOperator> branch_states)
    : probs_(std::move(branch_probs)), states_(std::move(branch_states)) {
  if (probs_.empty() || probs_.size() != states_.size()) throw DimensionMismatch("one state per branch expected");
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0)) throw DomainError("negative branch probability");
    total += p;
  }
  if (std::abs(total - 1.0) > kStateTol) throw DomainError("branch probabilities do not sum to 1");
  for (const auto& s : states_)
    if (s.system_dims() != states_.front().system_dims()) throw DimensionMismatch("branch states declare different factors");
}

double marginal_constraint_defect(const SwitchSource& src, const std::vector<std::size_t>& subsystems) {
  std::vector<DensityOperator> reduced;
  for (const auto& s : src.branch_states()) reduced.push_back(partial_trace(s, subsystems));
  double worst = 0.0;
  for (std::size_t i = 0; i < reduced.size(); ++i)
    for (std::size_t j = i + 1; j < reduced.size(); ++j) worst = std::max(worst, trace_distance(reduced[i], reduced[j]));
  return worst;
}

AttackDemo attack_example() {
  const ComplexMatrix half_id = ComplexMatrix::Identity(2, 2) / 2.0;
  const ComplexMatrix omega = maximally_entangled(2).projector();
  const ComplexMatrix tau = (ket_bra(4, 0, 0) + ket_bra(4, 3, 3)) / 2.0;
  const Dims qubits{2, 2, 2, 2};

  // Built as (A0, F, A1, B) and (A0, B, A1, F), then reordered to (A0, A1, B, F).
  const ComplexMatrix t1 = permute_subsystems(kron(kron(omega, ket_bra(2, 1, 1)), half_id), qubits, {0, 2, 3, 1});
  const ComplexMatrix t0 = permute_subsystems(kron(kron(tau, ket_bra(2, 0, 0)), half_id), qubits, {0, 2, 1, 3});
  SwitchSource source({0.5, 0.5}, {DensityOperator(t0, qubits), DensityOperator(t1, qubits)});

  // Alice reads her flag: optimal settings when it shows 1.
  const double r = 1.0 / std::sqrt(2.0);
  const std::array<ComplexMatrix, 2> alice_settings{pauli::x(), pauli::z()};
  const std::array<ComplexMatrix, 2> fred_settings{r * (pauli::x() + pauli::z()), r * (pauli::x() - pauli::z())};
  double chsh = 0.0;
  for (int x = 0; x < 2; ++x) {
    const ComplexMatrix a_op = kron(alice_settings[x], ket_bra(2, 1, 1)) + kron(pauli::z(), ket_bra(2, 0, 0));
    const ComplexMatrix a_full = kron(a_op, ComplexMatrix::Identity(4, 4));
    for (int y = 0; y < 2; ++y) {
      const ComplexMatrix f_full = embed_operator(fred_settings[y], qubits, 3);
      const double sign = (x == 1 && y == 1) ? -1.0 : 1.0;
      chsh += sign * expectation(source.branch_states()[1], a_full * f_full);
    }
  }

  const DensityOperator tau_state(tau, Dims{2, 2});
  const BinaryPvm z_basis(ket_bra(2, 0, 0), ket_bra(2, 1, 1));
  const double key_entropy = conditional_entropy(measure_to_cq(tau_state, z_basis, 0, Conditioning::Purifier));
  const double defect = marginal_constraint_defect(source, {0, 1});
  return AttackDemo{std::move(source), chsh, key_entropy, defect};
}

std::vector<Channel> embed_model_a_in_b(const std::vector<Channel>& phi_prime, std::size_t dim_a) {
  std::vector<Channel> out;
  for (const auto& phi : phi_prime) out.push_back(phi.with_identity_on_left(dim_a));
  return out;
}

ModelAConversion convert_model_b_to_a(const ModelBInstance& model, double tol) {
  const std::size_t n = model.gammas.size();
  if (n == 0 || model.probs.size() != n || model.inputs.size() != n) throw DimensionMismatch("inconsistent branch counts");
  const std::size_t da = model.dim_a;
  std::vector<DensityOperator> outputs;
  for (std::size_t t = 0; t < n; ++t) {
    const Channel& g = model.gammas[t];
    if (g.output_dims().empty() || g.output_dims().front() != da) throw DimensionMismatch("branch output must start with A");
    outputs.push_back(g.apply(model.inputs[t]));
  }
  const SwitchSource src(model.probs, outputs);
  const double defect = marginal_constraint_defect(src, {0});
  if (defect > tol) {
    std::ostringstream msg;
    msg << "branch outputs have A-marginals differing by " << defect;
    throw MarginalMismatch(msg.str());
  }

  const auto dA = static_cast<Eigen::Index>(da);
  ComplexMatrix rho_a = ComplexMatrix::Zero(dA, dA);
  for (std::size_t t = 0; t < n; ++t) rho_a += model.probs[t] * partial_trace(outputs[t], {0}).matrix();
  const DensityOperator common_marginal = DensityOperator::from_unnormalized(rho_a, Dims{da});
  const PureState psi = purify(common_marginal);

  const Dims& out_dims = model.gammas.front().output_dims();
  const Dims bf_dims(out_dims.begin() + 1, out_dims.end());
  const std::size_t dbf = dims_product(bf_dims);
  const std::size_t min_env = (da + dbf - 1) / dbf;

  std::vector<Channel> phis;
  std::vector<double> errors;
  ComplexMatrix mixed_target = ComplexMatrix::Zero(outputs[0].matrix().rows(), outputs[0].matrix().cols());
  ComplexMatrix mixed_rebuilt = mixed_target;
  for (std::size_t t = 0; t < n; ++t) {
    const PureState full = minimal_purification(outputs[t], min_env);
    const std::size_t env = full.dims()[1];
    const PureState target(full.amplitudes(), Dims{da, dbf * env});
    const Isometry w = uhlmann_isometry(psi, target, std::max(tol, 1e-8));
    Channel phi = Channel::from_isometry(w.matrix(), Dims{da}, bf_dims);
    const ComplexMatrix rebuilt = phi.with_identity_on_left(da).apply(psi.projector());
    errors.push_back(trace_norm(rebuilt - outputs[t].matrix()));
    mixed_target += model.probs[t] * outputs[t].matrix();
    mixed_rebuilt += model.probs[t] * rebuilt;
    phis.push_back(std::move(phi));
  }
  ModelAConversion out{std::move(phis), DensityOperator(psi), model.probs, std::move(errors),
                       trace_norm(mixed_rebuilt - mixed_target), defect};
  return out;
}

ModelBInstance random_model_b(std::size_t branches, std::size_t dim, Rng& rng) {
  if (branches == 0 || dim < 2) throw DomainError("need at least one branch and dimension 2");
  const Channel n = Channel::random(Dims{dim, dim}, Dims{dim, dim}, 2, rng);
  const DensityOperator tau = random_density(Dims{dim, dim}, rng);
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  ModelBInstance m;
  m.dim_a = dim;
  double total = 0.0;
  for (std::size_t t = 0; t < branches; ++t) {
    const Channel lambda = Channel::random(Dims{dim}, Dims{dim, dim}, 2, rng);
    m.gammas.push_back(lambda.with_identity_on_left(dim).after(n));
    m.inputs.push_back(tau);
    m.probs.push_back(unif(rng));
    total += m.probs.back();
  }
  for (double& p : m.probs) p /= total;
  return m;
}

Behavior::Behavior(const Table& probs, double tol) : probs_(probs) {
  for (double p : probs_)
    if (!std::isfinite(p) || p < -tol) throw MalformedBehavior("negative or non-finite probability");
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      double s = 0.0;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) s += (*this)(a, b, x, y);
      if (std::abs(s - 1.0) > tol) throw MalformedBehavior("p(.,.|x,y) is not normalized");
    }
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 2; ++a) {
      const double m0 = (*this)(a, 0, x, 0) + (*this)(a, 1, x, 0);
      const double m1 = (*this)(a, 0, x, 1) + (*this)(a, 1, x, 1);
      if (std::abs(m0 - m1) > tol) throw MalformedBehavior("Alice's marginal depends on y");
    }
  for (int y = 0; y < 2; ++y)
    for (int b = 0; b < 2; ++b) {
      const double m0 = (*this)(0, b, 0, y) + (*this)(1, b, 0, y);
      const double m1 = (*this)(0, b, 1, y) + (*this)(1, b, 1, y);
      if (std::abs(m0 - m1) > tol) throw MalformedBehavior("Bob's marginal depends on x");
    }
  for (double& p : probs_) p = std::max(p, 0.0);
}

double Behavior::correlator(int x, int y) const {
  return (*this)(0, 0, x, y) + (*this)(1, 1, x, y) - (*this)(0, 1, x, y) - (*this)(1, 0, x, y);
}

Behavior Behavior::parse(const std::string& text) {
  Table t{};
  std::array<bool, 16> seen{};
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    int x, y, a, b;
    double p;
    if (!(row >> x)) continue;
    if (!(row >> y >> a >> b >> p)) throw MalformedBehavior("line " + std::to_string(lineno) + ": expected x y a b p");
    for (int v : {x, y, a, b})
      if (v != 0 && v != 1) throw MalformedBehavior("line " + std::to_string(lineno) + ": binary labels expected");
    const auto idx = index(a, b, x, y);
    if (seen[idx]) throw MalformedBehavior("line " + std::to_string(lineno) + ": duplicate entry");
    seen[idx] = true;
    t[idx] = p;
  }
  for (bool s : seen)
    if (!s) throw MalformedBehavior("behavior table must list all 16 entries");
  return Behavior(t);
}

std::string Behavior::to_text() const {
  std::ostringstream out;
  out.precision(17);
  out << "# x y a b p\n";
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) out << x << ' ' << y << ' ' << a << ' ' << b << ' ' << (*this)(a, b, x, y) << '\n';
  return out.str();
}

Behavior Behavior::from_state(const DensityOperator& rho, const std::array<Reflection, 2>& alice,
                              const std::array<Reflection, 2>& bob) {
  const Dims& dims = rho.system_dims();
  if (dims.size() < 2) throw DimensionMismatch("behavior needs at least two factors");
  Table t{};
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const ComplexMatrix op = embed_operator(alice[x].effect(a), dims, 0) * embed_operator(bob[y].effect(b), dims, 1);
          t[index(a, b, x, y)] = expectation(rho, op);
        }
  return Behavior(t);
}

Behavior Behavior::deterministic(std::array<int, 2> fa, std::array<int, 2> fb) {
  Table t{};
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) t[index(fa[x], fb[y], x, y)] = 1.0;
  return Behavior(t);
}

Behavior Behavior::isotropic(double visibility) {
  if (!(visibility >= 0.0 && visibility <= 1.0)) throw DomainError("visibility must lie in [0, 1]");
  const double r = 1.0 / std::sqrt(2.0);
  Table t{};
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      const double c = (x == 1 && y == 1) ? -r : r;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const double sign = a == b ? 1.0 : -1.0;
          t[index(a, b, x, y)] = 0.25 * (1.0 + sign * visibility * c);
        }
    }
  return Behavior(t);
}

double chsh_facet_value(const Behavior& b) {
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < 4; ++k) {
    double s = 0.0;
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) s += (2 * x + y == k ? -1.0 : 1.0) * b.correlator(x, y);
    best = std::max({best, s, -s});
  }
  return best;
}

Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int max_iter) {
  const Eigen::Index n = a.cols();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  const double tol = 1e-13 * std::max(1.0, a.cwiseAbs().maxCoeff()) * static_cast<double>(std::max(a.rows(), n));

  auto solve_passive = [&]() {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j)
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    Eigen::MatrixXd ap(a.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) ap.col(static_cast<Eigen::Index>(k)) = a.col(idx[k]);
    Eigen::VectorXd sp = ap.completeOrthogonalDecomposition().solve(b);
    Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) s(idx[k]) = sp(static_cast<Eigen::Index>(k));
    return s;
  };

  for (int iter = 0; iter < max_iter; ++iter) {
    const Eigen::VectorXd w = a.transpose() * (b - a * x);
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!passive[static_cast<std::size_t>(j)] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;
    for (int inner = 0; inner < max_iter; ++inner) {
      const Eigen::VectorXd s = solve_passive();
      bool positive = true;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && s(j) <= 0.0) positive = false;
      if (positive) {
        x = s;
        break;
      }
      double alpha = 1.0;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && s(j) <= 0.0) alpha = std::min(alpha, x(j) / (x(j) - s(j)));
      x += alpha * (s - x);
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && x(j) <= tol) {
          passive[static_cast<std::size_t>(j)] = false;
          x(j) = 0.0;
        }
    }
  }
  return x;
}

LhvResult lhv_membership(const Behavior& b, double tol) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(17, 16);
  Eigen::VectorXd rhs(17);
  for (int v = 0; v < 16; ++v) {
    const std::array<int, 2> fa{(v >> 3) & 1, (v >> 2) & 1};
    const std::array<int, 2> fb{(v >> 1) & 1, v & 1};
    const Behavior d = Behavior::deterministic(fa, fb);
    for (std::size_t i = 0; i < 16; ++i) a(static_cast<Eigen::Index>(i), v) = d.table()[i];
    a(16, v) = 1.0;
  }
  for (std::size_t i = 0; i < 16; ++i) rhs(static_cast<Eigen::Index>(i)) = b.table()[i];
  rhs(16) = 1.0;
  const Eigen::VectorXd lambda = nnls(a, rhs);
  LhvResult r;
  for (int v = 0; v < 16; ++v) r.weights[static_cast<std::size_t>(v)] = lambda(v);
  r.residual = (a * lambda - rhs).norm();
  r.feasible = r.residual <= tol;
  r.facet_value = chsh_facet_value(b);
  return r;
}

}  // namespace rbqkd
