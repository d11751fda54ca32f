#include "rbqkd/overlap.hpp"
#include "rbqkd/random.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace rbqkd;
using rbqkd::test::max_abs;
using rbqkd::test::qubit_projector;

TEST_CASE("qubit blocks recover the angle between Bloch directions") {
  const double t = 0.7;
  const DensityOperator sigma = DensityOperator::maximally_mixed(2);
  const auto d = two_projection_blocks(qubit_projector(0.0), qubit_projector(t), sigma);
  REQUIRE(d.blocks.size() == 1);
  CHECK(d.blocks[0].dim == 2);
  // |<0|n>|^2 = cos^2(t/2) = x; cos theta = 2x - 1 = cos t.
  CHECK(d.blocks[0].cos_theta == doctest::Approx(std::cos(t)).epsilon(1e-12));
}

TEST_CASE("mutually unbiased qubit bases have overlap one half") {
  const DensityOperator sigma = DensityOperator::maximally_mixed(2);
  const Reflection z(pauli::z());
  const Reflection x(pauli::x());
  const OverlapReport r = overlap_report(sigma, x, z);
  CHECK(r.block_bound == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.anticommutator_bound == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("commuting projections split into one-dimensional blocks") {
  ComplexMatrix p = ComplexMatrix::Zero(3, 3);
  p(0, 0) = 1.0;
  ComplexMatrix q = ComplexMatrix::Zero(3, 3);
  q(0, 0) = 1.0;
  q(1, 1) = 1.0;
  const auto d = two_projection_blocks(p, q, DensityOperator::maximally_mixed(3));
  CHECK(d.blocks.size() == 3);
  for (const auto& b : d.blocks) CHECK(b.dim == 1);
  CHECK(max_abs(d.resolution() - ComplexMatrix::Identity(3, 3)) < 1e-12);
}

TEST_CASE("random instances: resolution, reduction, trace identity, ordering") {
  Rng rng(37);
  std::uniform_int_distribution<std::size_t> dim(2, 8);
  for (int i = 0; i < 200; ++i) {
    const std::size_t d = dim(rng);
    std::uniform_int_distribution<std::size_t> rank(0, d);
    const ComplexMatrix p = random_projector(d, rank(rng), rng);
    const ComplexMatrix q = random_projector(d, rank(rng), rng);
    const auto sigma = random_density({d}, rng);
    const auto dec = two_projection_blocks(p, q, sigma);
    const ComplexMatrix id = ComplexMatrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    CHECK(max_abs(dec.resolution() - id) < 1e-9);
    CHECK(dec.reduction_defect(p) < 1e-8);
    CHECK(dec.reduction_defect(q) < 1e-8);
    const ComplexMatrix x = 2.0 * p - id;
    const ComplexMatrix z = 2.0 * q - id;
    const ComplexMatrix ac = x * z + z * x;
    const double lhs = (sigma.matrix() * ac * ac).trace().real();
    CHECK(lhs == doctest::Approx(dec.trace_identity_rhs()).epsilon(1e-8));
    CHECK(cstar_block_bound(dec) <= cstar_anticommutator_bound(sigma, Reflection(x), Reflection(z)) + 1e-10);
  }
}

TEST_CASE("non-projector input is rejected") {
  CHECK_THROWS_AS(two_projection_blocks(ComplexMatrix::Identity(2, 2) * 0.5, ComplexMatrix::Identity(2, 2),
                                        DensityOperator::maximally_mixed(2)),
                  NotAProjector);
}

TEST_CASE("CHSH-based overlap bound") {
  CHECK(cstar_chsh_bound(2.0 * std::sqrt(2.0), 0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(cstar_chsh_bound(2.0, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cstar_chsh_bound(2.5, 0.0) < cstar_chsh_bound(2.2, 0.0));
  CHECK_THROWS_AS(cstar_chsh_bound(3.0, 0.0), DomainError);
}

TEST_CASE("continuity shift of the bound") {
  const auto a = DensityOperator::maximally_mixed(2);
  CHECK(cstar_continuity_shift(0.5, a, a) == doctest::Approx(0.5));
  const DensityOperator b(PureState(basis_vector(2, 0)));
  CHECK(cstar_continuity_shift(0.5, a, b) > 0.5);
}

TEST_CASE("dilated measurements form a POVM") {
  Rng rng(41);
  const Isometry iso = random_isometry(2, 5, rng);
  const BinaryPvm pvm = BinaryPvm::from_projector(qubit_projector(0.3));
  const BinaryPvm lifted = feasible_dilation_povms(pvm, iso);
  CHECK(max_abs(lifted.effect(0) + lifted.effect(1) - ComplexMatrix::Identity(5, 5)) < 1e-10);
  CHECK(max_abs(iso.matrix().adjoint() * lifted.effect(0) * iso.matrix() - pvm.effect(0)) < 1e-10);
}
