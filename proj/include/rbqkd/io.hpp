// JSON encoding of operators and states.
//
// A complex matrix is a list of rows, each a list of [re, im] pairs. States
// carry their factor dimensions under "system_dims".
#pragma once

#include "rbqkd/core.hpp"

#include <json.hpp>

#include <string>

namespace rbqkd::io {

using json = nlohmann::json;

json encode(const ComplexMatrix& m);
json encode(const ComplexVector& v);
json encode(const DensityOperator& rho);
json encode(const PureState& psi);

ComplexMatrix decode_matrix(const json& j);
ComplexVector decode_vector(const json& j);
/// Accepts either {"matrix": ..., "system_dims": [...]} or a bare matrix.
DensityOperator decode_density(const json& j);
PureState decode_pure(const json& j);
Reflection decode_reflection(const json& j);

json read_json_file(const std::string& path);

}  // namespace rbqkd::io
