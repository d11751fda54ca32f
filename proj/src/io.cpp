#include "rbqkd/io.hpp"

#include <fstream>

namespace rbqkd::io {

namespace {

json encode_entry(cplx z) { return json::array({z.real(), z.imag()}); }

cplx decode_entry(const json& e) {
  if (e.is_number()) return {e.get<double>(), 0.0};
  if (!e.is_array() || e.size() != 2) throw DomainError("complex entry must be [re, im]");
  return {e.at(0).get<double>(), e.at(1).get<double>()};
}

Dims decode_dims(const json& j, std::size_t dim) {
  if (!j.contains("system_dims")) return Dims{dim};
  return j.at("system_dims").get<Dims>();
}

}  // namespace

json encode(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(encode_entry(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json encode(const ComplexVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(encode_entry(v(i)));
  return out;
}

json encode(const DensityOperator& rho) {
  return json{{"matrix", encode(rho.matrix())}, {"system_dims", rho.system_dims()}};
}

json encode(const PureState& psi) {
  return json{{"amplitudes", encode(psi.amplitudes())}, {"system_dims", psi.dims()}};
}

ComplexMatrix decode_matrix(const json& j) {
  if (!j.is_array() || j.empty()) throw DomainError("matrix must be a nonempty list of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  ComplexMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw DomainError("ragged matrix rows");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = decode_entry(row.at(static_cast<std::size_t>(k)));
  }
  if (!all_finite(m)) throw DomainError("non-finite matrix entry");
  return m;
}

ComplexVector decode_vector(const json& j) {
  if (!j.is_array() || j.empty()) throw DomainError("vector must be a nonempty list");
  ComplexVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = decode_entry(j.at(i));
  return v;
}

DensityOperator decode_density(const json& j) {
  if (j.is_array()) return DensityOperator(decode_matrix(j));
  ComplexMatrix m = decode_matrix(j.at("matrix"));
  Dims dims = decode_dims(j, static_cast<std::size_t>(m.rows()));
  return DensityOperator(std::move(m), std::move(dims));
}

PureState decode_pure(const json& j) {
  if (j.is_array()) return PureState(decode_vector(j));
  ComplexVector v = decode_vector(j.at("amplitudes"));
  Dims dims = decode_dims(j, static_cast<std::size_t>(v.size()));
  return PureState(std::move(v), std::move(dims));
}

Reflection decode_reflection(const json& j) {
  if (j.is_object()) return Reflection(decode_matrix(j.at("matrix")));
  return Reflection(decode_matrix(j));
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DomainError(path + ": " + e.what());
  }
}

}  // namespace rbqkd::io
