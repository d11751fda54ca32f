#include "rbqkd/models.hpp"
#include "rbqkd/random.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace rbqkd;
using rbqkd::test::max_abs;

TEST_CASE("channels preserve trace and compose") {
  Rng rng(43);
  const Channel a = Channel::random({2}, {3}, 3, rng);
  const Channel b = Channel::random({3}, {2}, 2, rng);
  const auto rho = random_density({2}, rng);
  const auto out = b.after(a).apply(rho);
  CHECK(out.matrix().trace().real() == doctest::Approx(1.0));
  CHECK(max_abs(out.matrix() - b.apply(a.apply(rho)).matrix()) < 1e-12);
}

TEST_CASE("non trace-preserving Kraus sets are rejected") {
  CHECK_THROWS_AS(Channel({ComplexMatrix::Identity(2, 2) * 0.5}, {2}, {2}), NotTracePreserving);
}

TEST_CASE("identity extension acts on the second factor only") {
  Rng rng(47);
  const Channel c = Channel::random({2}, {2}, 2, rng);
  const auto a = random_density({2}, rng);
  const auto b = random_density({2}, rng);
  const auto out = c.with_identity_on_left(2).apply(tensor(a, b));
  CHECK(max_abs(out.matrix() - kron(a.matrix(), c.apply(b).matrix())) < 1e-12);
}

TEST_CASE("channel built from an isometry reproduces the reduced output") {
  Rng rng(53);
  const Isometry v = random_isometry(2, 6, rng);
  const Channel c = Channel::from_isometry(v.matrix(), {2}, {2});
  const auto rho = random_density({2}, rng);
  const ComplexMatrix full = v.matrix() * rho.matrix() * v.matrix().adjoint();
  CHECK(max_abs(c.apply(rho).matrix() - partial_trace(full, {2, 3}, {0})) < 1e-12);
}

TEST_CASE("attack example") {
  const AttackDemo d = attack_example();
  CHECK(std::abs(d.chsh - 2.0 * std::sqrt(2.0)) < 1e-10);
  CHECK(std::abs(d.key_entropy) < 1e-9);
  CHECK(std::abs(d.marginal_defect - 1.0) < 1e-10);
}

TEST_CASE("marginal defect vanishes for equal branches") {
  const auto rho = DensityOperator(maximally_entangled(2));
  const SwitchSource s({0.5, 0.5}, {rho, rho});
  CHECK(marginal_constraint_defect(s, {0}) == doctest::Approx(0.0));
}

TEST_CASE("channel model embeds into switch model") {
  Rng rng(59);
  const std::vector<Channel> phi = {Channel::random({2}, {2, 2}, 2, rng), Channel::random({2}, {2, 2}, 2, rng)};
  const auto gammas = embed_model_a_in_b(phi, 2);
  const auto tau = random_density({2, 2}, rng);
  for (std::size_t t = 0; t < 2; ++t) {
    const auto out = gammas[t].apply(tau);
    CHECK(max_abs(partial_trace(out, {0}).matrix() - partial_trace(tau, {0}).matrix()) < 1e-12);
  }
}

TEST_CASE("switch models convert to channel models") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(splitmix(61, seed));
    const ModelBInstance m = random_model_b(2 + seed % 2, 2, rng);
    const ModelAConversion c = convert_model_b_to_a(m);
    CHECK(c.total_error <= 1e-7);
    for (double e : c.branch_errors) CHECK(e <= 1e-7);
  }
}

TEST_CASE("conversion refuses sources that violate the marginal constraint") {
  Rng rng(67);
  ModelBInstance m = random_model_b(2, 2, rng);
  m.inputs[1] = random_density({2, 2}, rng);
  CHECK_THROWS_AS(convert_model_b_to_a(m), MarginalMismatch);
}

TEST_CASE("behavior validation and text round trip") {
  const Behavior b = Behavior::isotropic(0.7);
  const Behavior back = Behavior::parse(b.to_text());
  for (std::size_t i = 0; i < 16; ++i) CHECK(back.table()[i] == doctest::Approx(b.table()[i]).epsilon(1e-12));
  Behavior::Table t{};
  t.fill(0.25);
  t[Behavior::index(0, 0, 0, 0)] = 0.5;
  t[Behavior::index(1, 1, 0, 0)] = 0.0;
  t[Behavior::index(0, 1, 0, 0)] = 0.25;
  t[Behavior::index(1, 0, 0, 0)] = 0.25;
  CHECK_THROWS_AS(Behavior{t}, MalformedBehavior);
  CHECK_THROWS_AS(Behavior::parse("0 0 0 0 0.5\n"), MalformedBehavior);
}

TEST_CASE("behavior from a state matches correlators") {
  const std::array<Reflection, 2> alice{Reflection(pauli::x()), Reflection(pauli::z())};
  const std::array<Reflection, 2> bob{Reflection(pauli::xz_plane(std::acos(-1.0) / 4.0)),
                                      Reflection(pauli::xz_plane(3.0 * std::acos(-1.0) / 4.0))};
  const Behavior b = Behavior::from_state(DensityOperator(maximally_entangled(2)), alice, bob);
  CHECK(chsh_facet_value(b) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(b.correlator(1, 1) == doctest::Approx(-1.0 / std::sqrt(2.0)));
}

TEST_CASE("LHV membership") {
  const LhvResult ideal = lhv_membership(Behavior::isotropic(1.0));
  CHECK_FALSE(ideal.feasible);
  CHECK(ideal.facet_value == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
  const LhvResult edge = lhv_membership(Behavior::isotropic(1.0 / std::sqrt(2.0)));
  CHECK(edge.feasible);
  CHECK(std::abs(edge.facet_value - 2.0) < 1e-8);
  CHECK_FALSE(lhv_membership(Behavior::isotropic(0.75)).feasible);
  for (int k = 0; k < 16; ++k) {
    const auto r = lhv_membership(Behavior::deterministic({k & 1, (k >> 1) & 1}, {(k >> 2) & 1, (k >> 3) & 1}));
    CHECK(r.feasible);
  }
}

TEST_CASE("nnls solves a small nonnegative system") {
  Eigen::MatrixXd a(3, 2);
  a << 1, 0, 0, 1, 1, 1;
  Eigen::VectorXd b(3);
  b << 1, -1, 0;
  const Eigen::VectorXd x = nnls(a, b);
  CHECK(x.minCoeff() >= 0.0);
  CHECK(x(0) == doctest::Approx(0.5));
  CHECK(x(1) == doctest::Approx(0.0));
}
