#include "rbqkd/overlap.hpp"

#include <cmath>

namespace rbqkd {

namespace {

constexpr double kIdempotencyTol = 1e-8;

void require_projector(const ComplexMatrix& m, const char* name) {
  if (m.rows() != m.cols()) throw DimensionMismatch(std::string(name) + " is not square");
  if (hermiticity_defect(m) > kIdempotencyTol || (m * m - m).cwiseAbs().maxCoeff() > kIdempotencyTol)
    throw NotAProjector(std::string(name) + " is not an orthogonal projector");
}

// Orthonormal basis of the range of a projector.
ComplexMatrix range_basis(const ComplexMatrix& proj) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(proj));
  std::vector<Eigen::Index> cols;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > 0.5) cols.push_back(i);
  ComplexMatrix basis(proj.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) basis.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(cols[k]);
  return basis;
}

OverlapBlock one_dim_block(const ComplexVector& v, int p_value, int q_value) {
  OverlapBlock b;
  b.projector = v * v.adjoint();
  b.dim = 1;
  b.p_value = p_value;
  b.q_value = q_value;
  b.cos_theta = p_value == q_value ? 1.0 : -1.0;
  return b;
}

}  // namespace

double BlockDecomposition::total_weight() const {
  double w = 0.0;
  for (const auto& b : blocks) w += b.weight;
  return w;
}

ComplexMatrix BlockDecomposition::resolution() const {
  if (blocks.empty()) return ComplexMatrix();
  const auto d = blocks.front().projector.rows();
  ComplexMatrix sum = ComplexMatrix::Zero(d, d);
  for (const auto& b : blocks) sum += b.projector;
  return sum;
}

double BlockDecomposition::reduction_defect(const ComplexMatrix& m) const {
  double worst = 0.0;
  for (const auto& b : blocks) {
    const ComplexMatrix& pk = b.projector;
    worst = std::max(worst, (pk * m * pk - pk * m).cwiseAbs().maxCoeff());
  }
  return worst;
}

double BlockDecomposition::trace_identity_rhs() const {
  double s = 0.0;
  for (const auto& b : blocks) s += b.weight * b.cos_theta * b.cos_theta;
  return 4.0 * s;
}

BlockDecomposition two_projection_blocks(const ComplexMatrix& p, const ComplexMatrix& q, const DensityOperator& sigma,
                                         double tol) {
  require_projector(p, "p");
  require_projector(q, "q");
  if (p.rows() != q.rows() || static_cast<std::size_t>(p.rows()) != sigma.dim())
    throw DimensionMismatch("p, q and sigma must share one dimension");
  const auto d = p.rows();
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);

  BlockDecomposition out;
  const ComplexMatrix range_p = range_basis(p);
  if (range_p.cols() > 0) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(ComplexMatrix(range_p.adjoint() * q * range_p)));
    for (Eigen::Index k = 0; k < range_p.cols(); ++k) {
      const double x = es.eigenvalues()(k);
      const ComplexVector v = range_p * es.eigenvectors().col(k);
      if (x >= 1.0 - tol) {
        out.blocks.push_back(one_dim_block(v, 1, 1));
      } else if (x <= tol) {
        out.blocks.push_back(one_dim_block(v, 1, 0));
      } else {
        ComplexVector f = (id - p) * q * v;
        f.normalize();
        OverlapBlock b;
        b.projector = v * v.adjoint() + f * f.adjoint();
        b.dim = 2;
        b.cos_theta = 2.0 * x - 1.0;
        out.blocks.push_back(std::move(b));
      }
    }
  }
  // What is left lies in ker p and reduces q.
  ComplexMatrix covered = ComplexMatrix::Zero(d, d);
  for (const auto& b : out.blocks) covered += b.projector;
  const ComplexMatrix rest = range_basis(hermitian_part(ComplexMatrix(id - covered)));
  if (rest.cols() > 0) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(ComplexMatrix(rest.adjoint() * q * rest)));
    for (Eigen::Index k = 0; k < rest.cols(); ++k) {
      const ComplexVector v = rest * es.eigenvectors().col(k);
      out.blocks.push_back(one_dim_block(v, 0, es.eigenvalues()(k) > 0.5 ? 1 : 0));
    }
  }
  for (auto& b : out.blocks) b.weight = std::max(0.0, expectation(sigma, b.projector));
  return out;
}

double cstar_block_bound(const BlockDecomposition& d) {
  double c = 0.0;
  for (const auto& b : d.blocks) c += b.weight * (0.5 + 0.5 * std::abs(b.cos_theta));
  return std::clamp(c, 0.5, 1.0);
}

double cstar_anticommutator_bound(const DensityOperator& sigma, const Reflection& x, const Reflection& z) {
  if (x.dim() != sigma.dim() || z.dim() != sigma.dim()) throw DimensionMismatch("reflections do not act on sigma");
  const ComplexMatrix ac = anticommutator(x.matrix(), z.matrix());
  const double moment = std::max(0.0, expectation(sigma, ac * ac));
  return std::clamp(0.5 + 0.25 * std::sqrt(moment), 0.5, 1.0);
}

double cstar_chsh_bound(double omega, double marginal_eps) {
  const double tsirelson = 2.0 * std::sqrt(2.0);
  if (!(omega >= 0.0 && omega <= tsirelson + 1e-12)) throw DomainError("CHSH value outside [0, 2 sqrt 2]");
  if (!(marginal_eps >= 0.0)) throw DomainError("marginal slack must be nonnegative");
  const double root = std::sqrt(std::max(0.0, 8.0 - omega * omega));
  return std::clamp(0.5 + omega / 8.0 * root + marginal_eps / 2.0, 0.5, 1.0);
}

double cstar_continuity_shift(double bound, const DensityOperator& tau, const DensityOperator& tau_prime) {
  return std::clamp(bound + trace_distance(tau, tau_prime), 0.5, 1.0);
}

OverlapReport overlap_report(const DensityOperator& sigma, const Reflection& x, const Reflection& z,
                             std::optional<double> omega, double marginal_eps) {
  OverlapReport r;
  const auto blocks = two_projection_blocks(x.effect(0), z.effect(0), sigma);
  r.block_bound = cstar_block_bound(blocks);
  r.anticommutator_bound = cstar_anticommutator_bound(sigma, x, z);
  if (omega) r.chsh_bound = cstar_chsh_bound(*omega, marginal_eps);
  return r;
}

BinaryPvm feasible_dilation_povms(const BinaryPvm& pvm, const Isometry& iso, std::size_t padded_outcome) {
  if (iso.domain_dim() != pvm.dim()) throw DimensionMismatch("isometry domain differs from measurement dimension");
  if (padded_outcome > 1) throw DomainError("binary outcome expected");
  const ComplexMatrix& v = iso.matrix();
  const auto d = v.rows();
  std::array<ComplexMatrix, 2> pi{v * pvm.effect(0) * v.adjoint(), v * pvm.effect(1) * v.adjoint()};
  pi[padded_outcome] += ComplexMatrix::Identity(d, d) - v * v.adjoint();
  return BinaryPvm(hermitian_part(pi[0]), hermitian_part(pi[1]));
}

}  // namespace rbqkd
