// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include "rbqkd/chsh.hpp"
#include "rbqkd/entropy.hpp"
#include "rbqkd/keyrate.hpp"
#include "rbqkd/lift.hpp"
#include "rbqkd/models.hpp"
#include "rbqkd/overlap.hpp"
#include "rbqkd/protocol.hpp"
#include "rbqkd/random.hpp"
#include "support.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace rbqkd;
using rbqkd::test::h2;
using rbqkd::test::max_abs;

namespace {

const double kTsirelson = 2.0 * std::sqrt(2.0);
const double kTsirelsonWin = 0.5 + 1.0 / (2.0 * std::sqrt(2.0));

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (!pass) detail << "; ";
      detail << "failed: " << what;
      pass = false;
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

void keyrate_golden(Outcome& o) {
  const double top = routed_bb84_rate({kTsirelson, 0.0, 0.0, 0.0});
  const double local = routed_bb84_rate({2.0, 0.0, 0.0, 0.0});
  o.require(std::abs(top - 1.0) <= 1e-12, "rate at Tsirelson");
  o.require(std::abs(local) <= 1e-12, "rate at local bound");
  double worst = 0.0;
  for (int k = 0; k <= 11; ++k) {
    const double q = 0.01 * k;
    worst = std::max(worst, std::abs(routed_bb84_rate({kTsirelson, 0.0, q, q}) - (1.0 - 2.0 * h2(q))));
  }
  o.require(worst <= 1e-12, "1 - 2 h2(Q) grid");
  const double threshold = shor_preskill_threshold();
  o.require(std::abs(threshold - 0.11) <= 1e-4, "threshold");
  o.detail << "max grid error " << fmt(worst) << ", threshold " << threshold;
}

void selftest_constants(Outcome& o) {
  const DilationBudget b = dilation_budget(1e-4);
  o.require(std::abs(b.delta_meas - 1.11) <= 1e-12, "measurement error 1.11");
  o.require(std::abs(b.delta_state - 0.95) <= 1e-12, "state error 0.95");
  o.require(std::abs(b.root128 - std::pow(128.0, 0.25)) <= 1e-12, "fourth root of 128");
  o.require(std::abs(b.delta / std::sqrt(1e-4) - 4.0 * (1.0 + std::sqrt(2.0)) * std::pow(128.0, 0.25)) <= 1e-9,
            "4(1+sqrt2) factor");
  o.require(std::abs(b.gap - 1.0 / (2.0 * std::sqrt(2.0))) <= 1e-15, "spectral gap");
  o.require(b.state_coeff <= 95.0 && b.meas_coeff <= 111.0, "chain below the rounded constants");
  const auto ev = spectral_check_game_operator();
  o.require(std::abs(ev[0] - kTsirelsonWin) <= 1e-12 && std::abs(ev[1] - 0.5) <= 1e-12 &&
                std::abs(ev[2] - (1.0 - kTsirelsonWin)) <= 1e-12,
            "game operator spectrum");
  o.detail << "(" << b.delta_meas << ", " << b.delta_state << "), chain coefficients " << fmt(b.meas_coeff) << " / "
           << fmt(b.state_coeff) << " (with leading sqrt2: " << fmt(b.meas_coeff_with_sqrt2) << " / "
           << fmt(b.state_coeff_with_sqrt2) << ")";
}

void two_projection_engine(Outcome& o) {
  Rng rng(1001);
  std::uniform_int_distribution<std::size_t> dim(2, 8);
  double res = 0.0, trace = 0.0, order = -1.0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t d = dim(rng);
    std::uniform_int_distribution<std::size_t> rank(0, d);
    const ComplexMatrix p = random_projector(d, rank(rng), rng);
    const ComplexMatrix q = random_projector(d, rank(rng), rng);
    const auto sigma = random_density({d}, rng);
    const auto dec = two_projection_blocks(p, q, sigma);
    const auto n = static_cast<Eigen::Index>(d);
    const ComplexMatrix id = ComplexMatrix::Identity(n, n);
    res = std::max(res, max_abs(dec.resolution() - id));
    const ComplexMatrix x = 2.0 * p - id;
    const ComplexMatrix z = 2.0 * q - id;
    const ComplexMatrix ac = x * z + z * x;
    trace = std::max(trace, std::abs((sigma.matrix() * ac * ac).trace().real() - dec.trace_identity_rhs()));
    order = std::max(order, cstar_block_bound(dec) - cstar_anticommutator_bound(sigma, Reflection(x), Reflection(z)));
  }
  o.require(res <= 1e-9, "resolution of identity");
  o.require(trace <= 1e-8, "trace identity");
  o.require(order <= 1e-10, "block bound below anticommutator bound");
  o.detail << "resolution " << fmt(res) << ", trace identity " << fmt(trace) << ", max(block - anticomm) "
           << fmt(order);
}

void sos_defects_property(Outcome& o) {
  Rng rng(2002);
  std::uniform_real_distribution<double> spread(0.0, 0.6);
  const double root128 = std::pow(128.0, 0.25);
  const double ac_const = 2.0 * (1.0 + std::sqrt(2.0)) * root128;
  int accepted = 0;
  double worst_sos = -1.0, worst_ac = -1.0, max_eps = 0.0;
  while (accepted < 200) {
    const std::size_t d = 2 + static_cast<std::size_t>(accepted % 3);
    const Strategy s = accepted < 10 ? rbqkd::test::random_strategy(d, 0.0, rng)
                                     : rbqkd::test::random_strategy(d, spread(rng), rng);
    const double eps = std::max(0.0, kTsirelsonWin - chsh_game_value(s));
    if (eps > 0.05) continue;
    ++accepted;
    max_eps = std::max(max_eps, eps);
    const auto [d0, d1] = sos_defects(s);
    worst_sos = std::max(worst_sos, std::max(d0, d1) - root128 * std::sqrt(eps));
    worst_ac = std::max(worst_ac, anticommutator_defect(s) - ac_const * std::sqrt(eps));
  }
  o.require(worst_sos <= 1e-9, "sos defect bound");
  o.require(worst_ac <= 1e-9, "anticommutator bound");
  o.detail << "max deficit " << fmt(max_eps) << ", max(defect - bound) " << fmt(worst_sos) << " / " << fmt(worst_ac);
}

void model_equivalence(Outcome& o) {
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    Rng rng(splitmix(3003, i));
    const ModelBInstance m = random_model_b(2, 2, rng);
    const ModelAConversion c = convert_model_b_to_a(m);
    worst = std::max(worst, c.total_error);
    for (double e : c.branch_errors) worst = std::max(worst, e);
  }
  o.require(worst <= 1e-7, "reconstruction error");
  o.detail << "max reconstruction error " << fmt(worst);
}

void attack_demo(Outcome& o) {
  const AttackDemo d = attack_example();
  o.require(std::abs(d.chsh - kTsirelson) <= 1e-10, "CHSH value");
  o.require(std::abs(d.key_entropy) <= 1e-9, "key entropy");
  o.require(std::abs(d.marginal_defect - 1.0) <= 1e-10, "marginal defect");
  o.detail << "CHSH " << d.chsh << ", H(Z|E) " << fmt(d.key_entropy) << ", defect " << d.marginal_defect;
}

struct DilationFamily {
  std::vector<DilationPair> a, b;
  std::vector<DensityOperator> rho;
};

const DilationFamily& dilation_family() {
  static const DilationFamily family = [] {
    DilationFamily f;
    const std::array<double, 4> eps{0.0, 0.01, 0.02, 0.05};
    for (std::uint64_t i = 0; i < 500; ++i) {
      Rng rng(splitmix(4004, i));
      f.a.push_back(dilation_with_epsilon(eps[i % 4], rng));
      f.b.push_back(dilation_with_epsilon(eps[(i / 4) % 4], rng));
      f.rho.push_back(random_compatible_state(f.a.back(), f.b.back(), rng));
    }
    return f;
  }();
  return family;
}

void compression(Outcome& o) {
  const auto& f = dilation_family();
  double worst = -1.0;
  for (std::size_t i = 0; i < f.rho.size(); ++i) {
    const CompressionCheck c = verify_compression(f.a[i], f.b[i], f.rho[i]);
    worst = std::max(worst, c.deviation - 3.0 * (f.a[i].epsilon + f.b[i].epsilon));
  }
  o.require(worst <= 1e-9, "probability deviation");
  o.detail << f.rho.size() << " pairs, max(deviation - bound) " << fmt(worst);
}

void entropy_transfer(Outcome& o) {
  const auto& f = dilation_family();
  double min_slack = 1e300;
  for (std::size_t i = 0; i < f.rho.size(); ++i) {
    const EntropyTransferCheck t = verify_entropy_transfer(f.a[i], f.b[i], f.rho[i], 0);
    min_slack = std::min(min_slack, t.slack);
  }
  o.require(min_slack >= -1e-10, "nonnegative slack");
  o.detail << f.rho.size() << " pairs, min slack " << fmt(min_slack);
}

void relaxed_vs_oracle(Outcome& o) {
  RelaxedOptions opts;
  opts.restarts = 64;
  opts.seed = 5005;
  double worst = 0.0;
  for (double q : {0.0, 0.02, 0.05, 0.08}) {
    const RelaxedSolution s = solve_relaxed_opt({bb84_behavior(q), 0.0, 0, ideal_lift_measurements()}, opts);
    worst = std::max(worst, std::abs(s.entropy - (1.0 - h2(q))));
  }
  o.require(worst <= 5e-3, "agreement with 1 - h2(Q)");
  double prev = 1e300;
  bool monotone = true;
  std::ostringstream grid;
  for (double e : {0.0, 0.01, 0.02, 0.05, 0.1}) {
    const RelaxedSolution s = solve_relaxed_opt({bb84_behavior(0.05), e, 0, ideal_lift_measurements()}, opts);
    if (s.entropy > prev + 1e-9) monotone = false;
    prev = s.entropy;
    grid << ' ' << fmt(s.entropy);
  }
  o.require(monotone, "monotone in eps_prob");
  o.detail << "max error " << fmt(worst) << ", eps grid" << grid.str();
}

void protocol_simulation(Outcome& o) {
  ProtocolConfig c;
  c.rounds = 1000000;
  c.seed = 6006;
  c.workers = 1;
  const ProtocolTranscript t1 = run_protocol(c);
  c.workers = 8;
  const ProtocolTranscript t8 = run_protocol(c);
  o.require(t1 == t8, "identical transcripts at 1 and 8 workers");

  const auto within = [](double est, double p, std::uint64_t n) {
    return std::abs(est - p) <= 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  };
  std::uint64_t n_af = 0, n_bg = 0;
  for (auto n : t1.af) n_af += n;
  for (auto n : t1.bg) n_bg += n;
  o.require(within(t1.chsh_af, kTsirelsonWin, n_af), "CHSH_AF within 3 sigma");
  o.require(within(t1.chsh_bg, kTsirelsonWin, n_bg), "CHSH_BG within 3 sigma");
  o.require(t1.qber_key == 0.0, "noiseless key QBER");

  c.workers = 1;
  c.depolarizing_q = 0.05;
  const ProtocolTranscript tq = run_protocol(c);
  // White noise of weight q flips a perfectly correlated bit with probability q/2.
  const double qber = c.depolarizing_q / 2.0;
  o.require(within(tq.qber_key, qber, tq.key_rounds), "depolarized key QBER within 3 sigma");
  const Statistic& conj = tq.statistics.at(3);
  o.require(std::abs(conj.estimate - qber) <= 3.0 * conj.sigma, "depolarized conjugate QBER within 3 sigma");
  o.detail << "CHSH_AF " << fmt(t1.chsh_af) << ", CHSH_BG " << fmt(t1.chsh_bg) << ", QBER " << tq.qber_key << " / "
           << conj.estimate << " vs " << qber;
}

void lhv_membership_check(Outcome& o) {
  const LhvResult ideal = lhv_membership(Behavior::isotropic(1.0));
  o.require(!ideal.feasible, "ideal behavior rejected");
  o.require(std::abs(ideal.facet_value - kTsirelson) <= 1e-9, "ideal facet value");
  const LhvResult edge = lhv_membership(Behavior::isotropic(1.0 / std::sqrt(2.0)));
  o.require(edge.feasible && std::abs(edge.facet_value - 2.0) <= 1e-8, "boundary at visibility 1/sqrt2");
  Rng rng(7007);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::acos(-1.0));
  int products = 0;
  bool all = true;
  for (int i = 0; i < 100; ++i) {
    const auto ra = random_density({2}, rng);
    const auto rb = random_density({2}, rng);
    const std::array<Reflection, 2> alice{Reflection(pauli::xz_plane(angle(rng))), Reflection(pauli::xz_plane(angle(rng)))};
    const std::array<Reflection, 2> bob{Reflection(pauli::xz_plane(angle(rng))), Reflection(pauli::xz_plane(angle(rng)))};
    all = all && lhv_membership(Behavior::from_state(tensor(ra, rb), alice, bob)).feasible;
    ++products;
  }
  for (int k = 0; k < 16; ++k)
    all = all && lhv_membership(Behavior::deterministic({k & 1, (k >> 1) & 1}, {(k >> 2) & 1, (k >> 3) & 1})).feasible;
  o.require(all, "product behaviors accepted");
  o.detail << "facet " << ideal.facet_value << ", boundary facet " << edge.facet_value << ", " << products + 16
           << " product behaviors";
}

void finite_size(Outcome& o) {
  bool exact = true;
  for (double n : {1.0, 1e3, 1e6, 1e9})
    for (double h : {0.0, 0.25, 0.5, 1.0})
      for (double a : {1.01, 2.0}) exact = exact && finite_size_bound(n, h, a, 1.0) == n * h;
  o.require(exact, "p_omega = 1 gives N h");
  double worst = 0.0;
  for (double a : {1.001, 1.01, 1.1, 1.5, 2.0, 5.0})
    for (double p : {1e-12, 1e-6, 1e-3, 0.1, 0.5, 0.9}) {
      const double penalty = a / (a - 1.0) * std::log2(1.0 / p);
      const double got = -finite_size_bound(1e6, 0.0, a, p);
      worst = std::max(worst, std::abs(got - penalty) / std::max(1.0, penalty));
    }
  o.require(worst <= 1e-12, "penalty term");
  o.detail << "max relative penalty error " << fmt(worst);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"key-rate golden values", keyrate_golden},
      {"self-test constants", selftest_constants},
      {"two-projection engine", two_projection_engine},
      {"SOS defect bounds", sos_defects_property},
      {"model equivalence", model_equivalence},
      {"attack demo", attack_demo},
      {"compression", compression},
      {"entropy transfer", entropy_transfer},
      {"relaxed optimization vs oracle", relaxed_vs_oracle},
      {"protocol simulation", protocol_simulation},
      {"LHV membership", lhv_membership_check},
      {"finite-size formula", finite_size},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failed;
    std::printf("%s AC%zu %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.str().c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
