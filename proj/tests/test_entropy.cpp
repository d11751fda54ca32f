#include "rbqkd/entropy.hpp"
#include "rbqkd/random.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace rbqkd;
using rbqkd::test::entropy_bits;
using rbqkd::test::h2;

namespace {

DensityOperator bell_diagonal(double v) {
  const ComplexVector phi_plus = (kron(basis_vector(2, 0), basis_vector(2, 0)) + kron(basis_vector(2, 1), basis_vector(2, 1))) / std::sqrt(2.0);
  const ComplexVector phi_minus = (kron(basis_vector(2, 0), basis_vector(2, 0)) - kron(basis_vector(2, 1), basis_vector(2, 1))) / std::sqrt(2.0);
  const ComplexMatrix m = (1.0 + v) / 2.0 * phi_plus * phi_plus.adjoint() + (1.0 - v) / 2.0 * phi_minus * phi_minus.adjoint();
  return DensityOperator(m, {2, 2});
}

}  // namespace

TEST_CASE("binary entropy endpoints and midpoint") {
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(binary_entropy(0.11) == doctest::Approx(h2(0.11)).epsilon(1e-14));
  CHECK_THROWS_AS(binary_entropy(1.2), DomainError);
}

TEST_CASE("von Neumann entropy of mixed and pure states") {
  CHECK(von_neumann(DensityOperator::maximally_mixed(4)) == doctest::Approx(2.0));
  CHECK(von_neumann(DensityOperator(maximally_entangled(3))) == doctest::Approx(0.0));
}

TEST_CASE("conditional entropy of a maximally entangled pair is -1") {
  CHECK(conditional_entropy(DensityOperator(maximally_entangled(2)), {0}) == doctest::Approx(-1.0));
}

TEST_CASE("measured Bell-diagonal state: H(Z|E) with E purifying") {
  // Z outcome of a ((1+v)/2)Phi+ + ((1-v)/2)Phi- state. The phase error is
  // (1-v)/2 in the X basis, so H(Z_A|E) = 1 - h2((1-v)/2).
  for (double v : {1.0, 0.9, 0.5, 0.0}) {
    const auto rho = bell_diagonal(v);
    const BinaryPvm z = BinaryPvm::from_projector(rbqkd::test::qubit_projector(0.0));
    const CqState cq = measure_to_cq(rho, z, 0, Conditioning::Purifier);
    CHECK(conditional_entropy(cq) == doctest::Approx(1.0 - h2((1.0 - v) / 2.0)).epsilon(1e-9));
  }
}

TEST_CASE("cq conditional entropy matches the joint-state formula") {
  Rng rng(23);
  for (int i = 0; i < 10; ++i) {
    const auto r0 = random_density({3}, rng);
    const auto r1 = random_density({3}, rng);
    const CqState cq({0.3, 0.7}, {r0, r1});
    const double ref = entropy_bits(cq.joint().matrix()) - entropy_bits(cq.e_marginal());
    CHECK(conditional_entropy(cq) == doctest::Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("zero-probability outcomes need no conditional state") {
  const CqState cq({1.0, 0.0}, {DensityOperator::maximally_mixed(2), std::nullopt});
  CHECK(conditional_entropy(cq) == doctest::Approx(0.0));
  CHECK_THROWS(CqState({0.5, 0.5}, {DensityOperator::maximally_mixed(2), std::nullopt}));
}

TEST_CASE("relative entropy") {
  const ClassicalDistribution p({0.5, 0.5});
  const ClassicalDistribution q({0.9, 0.1});
  CHECK(relative_entropy(p, p) == doctest::Approx(0.0));
  CHECK(relative_entropy(q, p) == doctest::Approx(1.0 - h2(0.1)).epsilon(1e-12));
  CHECK_THROWS_AS(relative_entropy(p, ClassicalDistribution({1.0, 0.0})), SupportViolation);
}

TEST_CASE("sandwiched Renyi entropy lies below von Neumann and decreases in alpha") {
  Rng rng(29);
  for (int i = 0; i < 10; ++i) {
    const auto rho = random_density({2, 2}, rng);
    const BinaryPvm z = BinaryPvm::from_projector(rbqkd::test::qubit_projector(0.0));
    const CqState cq = measure_to_cq(rho, z, 0, Conditioning::Purifier);
    const double h = conditional_entropy(cq);
    const double r2 = renyi_down(cq, 1.5);
    const double r3 = renyi_down(cq, 3.0);
    CHECK(r2 <= h + 1e-9);
    CHECK(r3 <= r2 + 1e-9);
    CHECK(renyi_down(cq, 1.0001) == doctest::Approx(h).epsilon(1e-3));
  }
  CHECK_THROWS_AS(renyi_down(CqState({1.0}, {DensityOperator::maximally_mixed(2)}), 0.5), DomainError);
}

TEST_CASE("continuity term is zero at zero distance and increasing") {
  CHECK(continuity_f(0.0, 2) == doctest::Approx(0.0));
  CHECK(continuity_f(0.01, 2) < continuity_f(0.02, 2));
}
