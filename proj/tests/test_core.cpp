#include "rbqkd/core.hpp"
#include "rbqkd/io.hpp"
#include "rbqkd/random.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace rbqkd;
using rbqkd::test::max_abs;

TEST_CASE("kron places the left factor on the slow index") {
  ComplexVector v = kron(basis_vector(2, 1), basis_vector(3, 2));
  CHECK(std::abs(v(1 * 3 + 2) - cplx(1.0)) < 1e-15);
  CHECK(v.norm() == doctest::Approx(1.0));
}

TEST_CASE("partial trace of a product returns each factor") {
  Rng rng(3);
  const auto a = random_density({2}, rng);
  const auto b = random_density({3}, rng);
  const auto ab = tensor(a, b);
  CHECK(max_abs(partial_trace(ab, {0}).matrix() - a.matrix()) < 1e-12);
  CHECK(max_abs(partial_trace(ab, {1}).matrix() - b.matrix()) < 1e-12);
}

TEST_CASE("partial trace agrees with explicit index sums") {
  Rng rng(5);
  const auto rho = random_density({2, 3, 2}, rng);
  const ComplexMatrix& m = rho.matrix();
  ComplexMatrix ref = ComplexMatrix::Zero(4, 4);
  for (int i0 = 0; i0 < 2; ++i0)
    for (int i2 = 0; i2 < 2; ++i2)
      for (int j0 = 0; j0 < 2; ++j0)
        for (int j2 = 0; j2 < 2; ++j2)
          for (int k = 0; k < 3; ++k) ref(i0 * 2 + i2, j0 * 2 + j2) += m((i0 * 3 + k) * 2 + i2, (j0 * 3 + k) * 2 + j2);
  CHECK(max_abs(partial_trace(rho, {0, 2}).matrix() - ref) < 1e-12);
}

TEST_CASE("permute_subsystems swaps factors of a product") {
  Rng rng(8);
  const ComplexMatrix a = random_ginibre(2, 2, rng);
  const ComplexMatrix b = random_ginibre(3, 3, rng);
  CHECK(max_abs(permute_subsystems(kron(a, b), {2, 3}, {1, 0}) - kron(b, a)) < 1e-12);
}

TEST_CASE("purification reproduces the state") {
  Rng rng(11);
  for (int i = 0; i < 20; ++i) {
    const auto rho = random_density({3}, rng, 1 + i % 3);
    const PureState psi = purify(rho);
    CHECK(max_abs(reduced_state(psi, {0}).matrix() - rho.matrix()) < 1e-10);
  }
}

TEST_CASE("Uhlmann isometry maps one purification onto another") {
  Rng rng(13);
  for (int i = 0; i < 30; ++i) {
    const auto rho = random_density({2}, rng);
    const PureState psi = purify(rho);
    const ComplexMatrix u = kron(ComplexMatrix::Identity(2, 2), random_isometry(2, 4, rng).matrix());
    const PureState phi(u * psi.amplitudes(), {2, 4});
    const Isometry w = uhlmann_isometry(psi, phi);
    const ComplexVector mapped = kron(ComplexMatrix::Identity(2, 2), w.matrix()) * psi.amplitudes();
    CHECK((mapped - phi.amplitudes()).norm() < 1e-8);
  }
}

TEST_CASE("Uhlmann isometry rejects different marginals") {
  const PureState psi = maximally_entangled(2);
  const PureState phi(kron(basis_vector(2, 0), basis_vector(2, 0)), {2, 2});
  CHECK_THROWS_AS(uhlmann_isometry(psi, phi), MarginalMismatch);
}

TEST_CASE("value types validate their invariants") {
  ComplexMatrix bad = ComplexMatrix::Identity(2, 2);
  CHECK_THROWS_AS(DensityOperator{bad}, DomainError);
  ComplexMatrix neg = ComplexMatrix::Zero(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  CHECK_THROWS_AS(DensityOperator{neg}, DomainError);
  CHECK_THROWS_AS(DensityOperator(ComplexMatrix::Identity(2, 2) / 2.0, Dims{3}), DimensionMismatch);
  CHECK_THROWS_AS(Reflection(ComplexMatrix::Identity(2, 2) * 0.5), DomainError);
  CHECK_THROWS_AS(BinaryPvm::from_projector(ComplexMatrix::Identity(2, 2) * 0.5), NotAProjector);
  CHECK_THROWS_AS(Isometry(ComplexMatrix::Ones(2, 2)), DomainError);
  CHECK_THROWS_AS(PureState(ComplexVector::Zero(2)), DomainError);
}

TEST_CASE("clamping removes tiny negative eigenvalues only") {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = 1.0 + 5e-11;
  m(1, 1) = -5e-11;
  CHECK_NOTHROW(DensityOperator{m});
  CHECK(clamped_eigenvalues(m).minCoeff() == 0.0);
}

TEST_CASE("trace distance of orthogonal pure states is one") {
  const DensityOperator a(PureState(basis_vector(2, 0)));
  const DensityOperator b(PureState(basis_vector(2, 1)));
  CHECK(trace_distance(a, b) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(trace_distance(a, a) == doctest::Approx(0.0));
}

TEST_CASE("random unitaries are unitary") {
  Rng rng(17);
  for (std::size_t d = 1; d <= 6; ++d) {
    const ComplexMatrix u = random_unitary(d, rng);
    CHECK(max_abs(u.adjoint() * u - ComplexMatrix::Identity(d, d)) < 1e-12);
  }
}

TEST_CASE("splitmix streams are reproducible and distinct") {
  CHECK(splitmix(1, 2) == splitmix(1, 2));
  CHECK(splitmix(1, 2) != splitmix(1, 3));
  CHECK(splitmix(1, 2) != splitmix(2, 2));
}

TEST_CASE("JSON round trip of states and reflections") {
  Rng rng(19);
  const auto rho = random_density({2, 2}, rng);
  const auto back = io::decode_density(io::encode(rho));
  CHECK(max_abs(back.matrix() - rho.matrix()) == 0.0);
  CHECK(back.system_dims() == rho.system_dims());
  const PureState psi = random_pure_state({3}, rng);
  CHECK((io::decode_pure(io::encode(psi)).amplitudes() - psi.amplitudes()).norm() == 0.0);
  const Reflection x(pauli::x());
  CHECK(max_abs(io::decode_reflection(io::encode(x.matrix())).matrix() - x.matrix()) == 0.0);
  CHECK_THROWS_AS(io::decode_matrix(io::json::parse("[[[1,0]],[[1,0],[0,0]]]")), DomainError);
}
