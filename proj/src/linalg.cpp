#include "rbqkd/linalg.hpp"

#include "rbqkd/errors.hpp"

#include <stdexcept>
#include <string>

namespace rbqkd {

namespace {

void check_perm(const Dims& dims, const std::vector<std::size_t>& perm) {
  if (perm.size() != dims.size()) throw DimensionMismatch("permutation length differs from factor count");
  std::vector<bool> seen(dims.size(), false);
  for (std::size_t p : perm) {
    if (p >= dims.size() || seen[p]) throw DimensionMismatch("not a permutation of the factors");
    seen[p] = true;
  }
}

// Maps each input flat index to its position after the permutation.
std::vector<Eigen::Index> permutation_map(const Dims& dims, const std::vector<std::size_t>& perm) {
  const std::size_t n = dims.size();
  const std::size_t total = dims_product(dims);
  Dims out_dims(n);
  for (std::size_t k = 0; k < n; ++k) out_dims[k] = dims[perm[k]];
  // stride of input factor perm[k] inside the output layout
  std::vector<std::size_t> out_stride(n, 1);
  for (std::size_t k = n; k-- > 1;) out_stride[k - 1] = out_stride[k] * out_dims[k];
  std::vector<std::size_t> in_to_out_stride(n);
  for (std::size_t k = 0; k < n; ++k) in_to_out_stride[perm[k]] = out_stride[k];

  std::vector<Eigen::Index> map(total);
  std::vector<std::size_t> digits(n, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t target = 0;
    for (std::size_t f = 0; f < n; ++f) target += digits[f] * in_to_out_stride[f];
    map[flat] = static_cast<Eigen::Index>(target);
    for (std::size_t f = n; f-- > 0;) {
      if (++digits[f] < dims[f]) break;
      digits[f] = 0;
    }
  }
  return map;
}

}  // namespace

RealVector clamped_eigenvalues(const ComplexMatrix& herm, double tol) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(herm), Eigen::EigenvaluesOnly);
  RealVector ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < 0.0 && ev(i) >= -tol) ev(i) = 0.0;
  }
  return ev;
}

ComplexMatrix psd_sqrt(const ComplexMatrix& herm) {
  return psd_function(herm, [](double x) { return std::sqrt(x); });
}

double trace_norm(const ComplexMatrix& m) {
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues().sum();
}

double operator_norm(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues()(0);
}

ComplexMatrix permute_subsystems(const ComplexMatrix& op, const Dims& dims, const std::vector<std::size_t>& perm) {
  check_perm(dims, perm);
  const auto total = static_cast<Eigen::Index>(dims_product(dims));
  if (op.rows() != total || op.cols() != total) throw DimensionMismatch("operator does not match declared dims");
  const auto map = permutation_map(dims, perm);
  ComplexMatrix out(total, total);
  for (Eigen::Index j = 0; j < total; ++j)
    for (Eigen::Index i = 0; i < total; ++i) out(map[i], map[j]) = op(i, j);
  return out;
}

ComplexVector permute_subsystems(const ComplexVector& vec, const Dims& dims, const std::vector<std::size_t>& perm) {
  check_perm(dims, perm);
  const auto total = static_cast<Eigen::Index>(dims_product(dims));
  if (vec.size() != total) throw DimensionMismatch("vector does not match declared dims");
  const auto map = permutation_map(dims, perm);
  ComplexVector out(total);
  for (Eigen::Index i = 0; i < total; ++i) out(map[i]) = vec(i);
  return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& op, const Dims& dims, const std::vector<std::size_t>& keep) {
  std::vector<bool> kept(dims.size(), false);
  for (std::size_t k : keep) {
    if (k >= dims.size()) throw DimensionMismatch("subsystem index " + std::to_string(k) + " out of range");
    if (kept[k]) throw DimensionMismatch("subsystem listed twice");
    kept[k] = true;
  }
  std::vector<std::size_t> perm(keep.begin(), keep.end());
  std::sort(perm.begin(), perm.end());
  std::size_t dk = 1;
  for (std::size_t k : perm) dk *= dims[k];
  for (std::size_t f = 0; f < dims.size(); ++f)
    if (!kept[f]) perm.push_back(f);
  const ComplexMatrix arranged = permute_subsystems(op, dims, perm);
  const auto keep_dim = static_cast<Eigen::Index>(dk);
  const Eigen::Index traced_dim = arranged.rows() / keep_dim;
  ComplexMatrix out = ComplexMatrix::Zero(keep_dim, keep_dim);
  for (Eigen::Index i = 0; i < keep_dim; ++i)
    for (Eigen::Index j = 0; j < keep_dim; ++j)
      for (Eigen::Index t = 0; t < traced_dim; ++t) out(i, j) += arranged(i * traced_dim + t, j * traced_dim + t);
  return out;
}

ComplexMatrix embed_operator(const ComplexMatrix& op, const Dims& dims, std::size_t site) {
  if (site >= dims.size()) throw DimensionMismatch("site out of range");
  if (static_cast<std::size_t>(op.rows()) != dims[site] || op.rows() != op.cols())
    throw DimensionMismatch("operator does not fit the site");
  std::size_t before = 1, after = 1;
  for (std::size_t f = 0; f < site; ++f) before *= dims[f];
  for (std::size_t f = site + 1; f < dims.size(); ++f) after *= dims[f];
  const auto b = static_cast<Eigen::Index>(before);
  const auto a = static_cast<Eigen::Index>(after);
  return kron(kron(ComplexMatrix::Identity(b, b), op), ComplexMatrix::Identity(a, a));
}

namespace pauli {

ComplexMatrix identity() { return ComplexMatrix::Identity(2, 2); }

ComplexMatrix x() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

ComplexMatrix y() {
  ComplexMatrix m(2, 2);
  m << 0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0;
  return m;
}

ComplexMatrix z() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

ComplexMatrix xz_plane(double t) { return std::cos(t) * z() + std::sin(t) * x(); }

}  // namespace pauli

}  // namespace rbqkd
