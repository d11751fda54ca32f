#include "rbqkd/protocol.hpp"

#include "rbqkd/chsh.hpp"
#include "rbqkd/keyrate.hpp"
#include "rbqkd/random.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <thread>

namespace rbqkd {

namespace {

constexpr double kPi = std::numbers::pi;

void require_prob(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError(std::string(name) + " must lie in [0, 1]");
}

struct Tally {
  std::uint64_t test = 0;
  std::uint64_t key_rounds = 0;
  JointCounts af{};
  JointCounts bg{};
  JointCounts ab{};
  std::array<std::uint64_t, 4> key{};
  std::array<std::uint64_t, 8> alice{};

  void add(const Tally& o) {
    test += o.test;
    key_rounds += o.key_rounds;
    for (std::size_t i = 0; i < 16; ++i) {
      af[i] += o.af[i];
      bg[i] += o.bg[i];
      ab[i] += o.ab[i];
    }
    for (std::size_t i = 0; i < 4; ++i) key[i] += o.key[i];
    for (std::size_t i = 0; i < 8; ++i) alice[i] += o.alice[i];
  }
};

class RoundSampler {
 public:
  RoundSampler(std::uint64_t seed, std::uint64_t round) : rng_(splitmix(seed, round)) {}

  double uniform() { return unif_(rng_); }
  int bit(double p_zero) { return uniform() < p_zero ? 0 : 1; }

  // Outcomes of a depolarized maximally entangled pair measured at angles s, t.
  std::pair<int, int> pair(double visibility, double s, double t) {
    const int a = bit(0.5);
    const double agree = 0.5 * (1.0 + visibility * std::cos(s - t));
    const int b = uniform() < agree ? a : 1 - a;
    return {a, b};
  }

 private:
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
};

void simulate_range(const ProtocolConfig& cfg, std::uint64_t begin, std::uint64_t end, Tally& tally) {
  const double v_long = 1.0 - cfg.depolarizing_q;
  const double v_local = 1.0 - cfg.local_q;
  for (std::uint64_t r = begin; r < end; ++r) {
    RoundSampler s(cfg.seed, r);
    const bool test = s.uniform() < cfg.gamma;
    if (!test) {
      const auto [a, b] = s.pair(v_long, alice_angle(0), bob_key_angle());
      ++tally.key[static_cast<std::size_t>(2 * a + b)];
      ++tally.key_rounds;
      continue;
    }
    ++tally.test;
    const int ta = s.uniform() < cfg.t_a ? 1 : 0;
    const int tb = s.uniform() < cfg.t_b ? 1 : 0;
    const int x = s.bit(cfg.p_a);
    const int y = s.bit(cfg.p_b);
    const int xf = s.bit(cfg.p_f);
    const int xg = s.bit(cfg.p_g);
    int a = 0;
    if (ta == 1) {
      const auto [oa, of] = s.pair(v_local, alice_angle(x), tester_angle(xf));
      a = oa;
      ++tally.af[Behavior::index(oa, of, x, xf)];
    }
    if (tb == 1) {
      const auto [og, ob] = s.pair(v_local, george_angle(xg), tester_angle(y));
      ++tally.bg[Behavior::index(og, ob, xg, y)];
    }
    if (ta == 0 && tb == 0) {
      const auto [oa, ob] = s.pair(v_long, alice_angle(x), tester_angle(y));
      a = oa;
      ++tally.ab[Behavior::index(oa, ob, x, y)];
    } else if (ta == 0) {
      a = s.bit(0.5);
    }
    ++tally.alice[static_cast<std::size_t>(4 * ta + 2 * x + a)];
  }
}

double win_fraction(const JointCounts& c, std::uint64_t& total) {
  std::uint64_t wins = 0;
  total = 0;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const std::uint64_t n = c[Behavior::index(a, b, x, y)];
          total += n;
          if ((a ^ b) == (x & y)) wins += n;
        }
  return total ? static_cast<double>(wins) / static_cast<double>(total) : 0.0;
}

double correlator(const JointCounts& c, int x, int y, std::uint64_t& total) {
  double sum = 0.0;
  total = 0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const std::uint64_t n = c[Behavior::index(a, b, x, y)];
      total += n;
      sum += (a == b ? 1.0 : -1.0) * static_cast<double>(n);
    }
  return total ? sum / static_cast<double>(total) : 0.0;
}

double binomial_sigma(double p, std::uint64_t n) {
  return n ? std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n)) : 0.0;
}

}  // namespace

void ProtocolConfig::validate() const {
  if (rounds < 1) throw DomainError("at least one round is required");
  require_prob(gamma, "gamma");
  require_prob(p_a, "p_a");
  require_prob(p_b, "p_b");
  require_prob(p_f, "p_f");
  require_prob(p_g, "p_g");
  require_prob(t_a, "t_a");
  require_prob(t_b, "t_b");
  require_prob(depolarizing_q, "depolarizing_q");
  require_prob(local_q, "local_q");
  if (!(accept_tolerance >= 0.0)) throw DomainError("accept_tolerance must be nonnegative");
}

double alice_angle(int x) { return x == 0 ? kPi / 2.0 : 0.0; }
double tester_angle(int y) { return y == 0 ? kPi / 4.0 : 3.0 * kPi / 4.0; }
double george_angle(int x) { return alice_angle(x); }
double bob_key_angle() { return kPi / 2.0; }

double expected_chsh_win(const ProtocolConfig& cfg) { return 0.5 * (1.0 + (1.0 - cfg.local_q) / std::sqrt(2.0)); }

double expected_qber(const ProtocolConfig& cfg) { return 0.5 * cfg.depolarizing_q; }

Behavior expected_ab_behavior(const ProtocolConfig& cfg) { return bb84_behavior(expected_qber(cfg)); }

ProtocolTranscript run_protocol(const ProtocolConfig& cfg) {
  cfg.validate();
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::uint64_t>(cfg.workers, cfg.rounds));
  std::vector<Tally> partial(workers);
  std::vector<std::thread> pool;
  const std::uint64_t chunk = (cfg.rounds + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::uint64_t begin = std::min<std::uint64_t>(cfg.rounds, w * chunk);
    const std::uint64_t end = std::min<std::uint64_t>(cfg.rounds, begin + chunk);
    pool.emplace_back([&cfg, begin, end, &tally = partial[w]] { simulate_range(cfg, begin, end, tally); });
  }
  for (auto& t : pool) t.join();
  Tally total;
  for (const auto& p : partial) total.add(p);

  ProtocolTranscript t;
  t.rounds = cfg.rounds;
  t.test_rounds = total.test;
  t.key_rounds = total.key_rounds;
  t.af = total.af;
  t.bg = total.bg;
  t.ab = total.ab;
  t.key = total.key;
  t.alice_marginal = total.alice;

  const double win_ideal = expected_chsh_win(cfg);
  const double qber_ideal = expected_qber(cfg);
  std::uint64_t n_af = 0, n_bg = 0;
  t.chsh_af = win_fraction(t.af, n_af);
  t.chsh_bg = win_fraction(t.bg, n_bg);
  const std::uint64_t n_key = t.key_rounds;
  t.qber_key = n_key ? static_cast<double>(t.key[1] + t.key[2]) / static_cast<double>(n_key) : 0.0;
  std::uint64_t n10 = 0, n11 = 0;
  const double e10 = correlator(t.ab, 1, 0, n10);
  const double e11 = correlator(t.ab, 1, 1, n11);
  const std::uint64_t n_conj = n10 + n11;
  t.qber_conj = n10 && n11 ? 0.5 * (1.0 - (e10 - e11) / std::sqrt(2.0)) : 0.0;
  // Var of (1 - (E10 - E11)/sqrt2)/2 with each E estimated from n/2 samples.
  const double conj_sigma =
      n10 && n11 ? 0.5 / std::sqrt(2.0) *
                       std::sqrt((1.0 - std::pow((1.0 - 2.0 * qber_ideal) / std::sqrt(2.0), 2)) *
                                 (1.0 / static_cast<double>(n10) + 1.0 / static_cast<double>(n11)))
                 : 0.0;

  double defect = 0.0;
  for (int x = 0; x < 2; ++x) {
    double p0[2] = {0.0, 0.0};
    bool have[2] = {false, false};
    for (int ta = 0; ta < 2; ++ta) {
      const auto n0 = t.alice_marginal[static_cast<std::size_t>(4 * ta + 2 * x)];
      const auto n1 = t.alice_marginal[static_cast<std::size_t>(4 * ta + 2 * x + 1)];
      if (n0 + n1 == 0) continue;
      have[ta] = true;
      p0[ta] = static_cast<double>(n0) / static_cast<double>(n0 + n1);
    }
    if (have[0] && have[1]) defect = std::max(defect, std::abs(p0[0] - p0[1]));
  }
  t.alice_marginal_defect = defect;

  t.statistics = {
      {"chsh_af", n_af, t.chsh_af, win_ideal, binomial_sigma(win_ideal, n_af)},
      {"chsh_bg", n_bg, t.chsh_bg, win_ideal, binomial_sigma(win_ideal, n_bg)},
      {"qber_key", n_key, t.qber_key, qber_ideal, binomial_sigma(qber_ideal, n_key)},
      {"qber_conj", n_conj, t.qber_conj, qber_ideal, conj_sigma},
  };
  t.accepted = true;
  for (const auto& s : t.statistics)
    if (s.count == 0 || std::abs(s.estimate - s.ideal) > cfg.accept_tolerance) t.accepted = false;
  return t;
}

std::string ProtocolTranscript::to_csv() const {
  std::ostringstream out;
  out << std::setprecision(12);
  out << "name,count,estimate,ideal,sigma\n";
  for (const auto& s : statistics) out << s.name << ',' << s.count << ',' << s.estimate << ',' << s.ideal << ',' << s.sigma << '\n';
  return out.str();
}

SiftSummary sift(const ProtocolTranscript& t, const ProtocolConfig& cfg) {
  SiftSummary s;
  const double n = static_cast<double>(t.rounds);
  s.key_rounds = t.key_rounds;
  s.expected_fraction = 1.0 - cfg.gamma;
  s.expected_count = s.expected_fraction * n;
  s.sigma = std::sqrt(n * cfg.gamma * (1.0 - cfg.gamma));
  s.alternative_count = cfg.gamma * cfg.t_a * cfg.t_b * cfg.p_a * cfg.p_b * n;
  return s;
}

double finite_size_bound(double n, double h_alpha, double alpha, double p_omega) {
  if (!(alpha > 1.0)) throw DomainError("alpha must exceed 1");
  if (!(p_omega > 0.0 && p_omega <= 1.0)) throw DomainError("p_omega must lie in (0, 1]");
  if (!(n >= 0.0)) throw DomainError("round count must be nonnegative");
  return n * h_alpha - alpha / (alpha - 1.0) * std::log2(1.0 / p_omega);
}

double single_round_objective(const ClassicalDistribution& q, const ClassicalDistribution& p, double alpha,
                              double h_down) {
  if (!(alpha > 1.0)) throw DomainError("alpha must exceed 1");
  return relative_entropy(q, p) / (alpha - 1.0) + q.probs().back() * h_down;
}

EndToEndReport end_to_end_rate(const ProtocolTranscript& t, const ProtocolConfig& cfg, const EndToEndOptions& opts) {
  if (!t.accepted) throw RejectedTranscript("transcript was rejected by parameter estimation");
  EndToEndReport r;
  const double tsirelson = 0.5 + 1.0 / (2.0 * std::sqrt(2.0));
  r.win_af = opts.asymptotic ? expected_chsh_win(cfg) : t.chsh_af;
  r.win_bg = opts.asymptotic ? expected_chsh_win(cfg) : t.chsh_bg;
  r.qber_key = opts.asymptotic ? expected_qber(cfg) : t.qber_key;
  r.deficit_af = std::max(0.0, tsirelson - r.win_af);
  r.deficit_bg = std::max(0.0, tsirelson - r.win_bg);
  r.eps_a = dilation_budget(r.deficit_af).delta_meas;
  r.eps_b = dilation_budget(r.deficit_bg).delta_meas;

  Behavior ab = expected_ab_behavior(cfg);
  double slack = 0.0;
  if (!opts.asymptotic) {
    Behavior::Table table{};
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) {
        std::uint64_t n = 0;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) n += t.ab[Behavior::index(a, b, x, y)];
        if (n == 0) throw RejectedTranscript("no A-B test rounds for some input pair");
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            table[Behavior::index(a, b, x, y)] = static_cast<double>(t.ab[Behavior::index(a, b, x, y)]) / static_cast<double>(n);
      }
    ab = Behavior(table, 1.0);
    slack = cfg.accept_tolerance;
  }
  const ReductionResult red = reduction_chain(ab, r.eps_a, r.eps_b, 0, opts.relaxed, slack);
  r.eps_prob = red.eps_prob;
  r.relaxed = red.relaxed;
  r.continuity = red.continuity;
  r.lifted_entropy = red.value;
  r.leak = binary_entropy(r.qber_key);
  if (opts.asymptotic) {
    r.rate = devetak_winter(r.lifted_entropy, r.leak);
  } else {
    const double n = static_cast<double>(t.rounds);
    r.penalty = (n * r.lifted_entropy - finite_size_bound(n, r.lifted_entropy, opts.alpha, opts.p_omega)) / n;
    r.rate = devetak_winter(finite_size_bound(n, r.lifted_entropy, opts.alpha, opts.p_omega) / n, r.leak);
  }
  return r;
}

}  // namespace rbqkd
