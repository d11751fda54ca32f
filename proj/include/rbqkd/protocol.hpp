// Monte-Carlo simulation of the four-party spot-checking protocol, parameter
// estimation, and the finite-size bound.
//
// Honest model: Alice's source always emits a maximally entangled pair. Her
// switch (T_A = 1 with probability t_a) sends the second half to Fred over a
// short link, otherwise over the long link towards Bob. Bob's switch
// (T_B = 1 with probability t_b) pairs him with George over a short link,
// otherwise Bob measures the long-link half. Parties left without a partner
// observe uniform outcomes. Links are depolarizing channels.
//
// Observables are reflections cos(t) Z + sin(t) X:
//   Alice x = 0, 1: X, Z         Fred / Bob y = 0, 1: (X+Z)/sqrt2, (X-Z)/sqrt2
//   George x = 0, 1: X, Z        Bob y = 2 (key): X
// Key rounds use x = 0 and y = 2, so raw keys are X outcomes.
#pragma once

#include "rbqkd/entropy.hpp"
#include "rbqkd/lift.hpp"
#include "rbqkd/models.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace rbqkd {

struct ProtocolConfig {
  std::uint64_t rounds = 1000000;
  double gamma = 0.1;  ///< probability of a test round
  double p_a = 0.5;    ///< P(x = 0) for Alice in test rounds
  double p_b = 0.5;    ///< P(y = 0) for Bob
  double p_f = 0.5;
  double p_g = 0.5;
  double t_a = 0.5;    ///< P(T_A = 1): Alice's pair goes to Fred
  double t_b = 0.5;    ///< P(T_B = 1): Bob is paired with George
  double depolarizing_q = 0.0;  ///< long A–B link
  double local_q = 0.0;         ///< short A–F and B–G links
  double accept_tolerance = 0.01;
  std::uint64_t seed = 1;
  std::size_t workers = 1;  ///< does not affect results

  void validate() const;
};

/// Observable angle t with cos(t) Z + sin(t) X for the named party/input.
double alice_angle(int x);
double tester_angle(int y);  ///< Fred and Bob (y = 0, 1)
double george_angle(int x);
double bob_key_angle();

using JointCounts = std::array<std::uint64_t, 16>;  ///< indexed by Behavior::index

struct Statistic {
  std::string name;
  std::uint64_t count = 0;
  double estimate = 0.0;
  double ideal = 0.0;
  double sigma = 0.0;

  bool operator==(const Statistic&) const = default;
};

struct ProtocolTranscript {
  std::uint64_t rounds = 0;
  std::uint64_t test_rounds = 0;
  std::uint64_t key_rounds = 0;
  JointCounts af{};  ///< (a, f | x, y_F), T_A = 1
  JointCounts bg{};  ///< (g, b | x_G, y_B), T_B = 1
  JointCounts ab{};  ///< (a, b | x, y), T_A = T_B = 0 in test rounds
  std::array<std::uint64_t, 4> key{};  ///< (a, b) in key rounds, index 2a + b
  std::array<std::uint64_t, 8> alice_marginal{};  ///< [T_A][x][a] in test rounds

  double chsh_af = 0.0;    ///< winning probability
  double chsh_bg = 0.0;
  double qber_key = 0.0;   ///< X-basis error rate of the raw key
  double qber_conj = 0.0;  ///< Z-basis error rate inferred from A–B tests
  double alice_marginal_defect = 0.0;
  std::vector<Statistic> statistics;
  bool accepted = false;

  bool operator==(const ProtocolTranscript&) const = default;

  std::string to_csv() const;
};

ProtocolTranscript run_protocol(const ProtocolConfig& cfg);

/// Honest-model values of the tracked statistics.
double expected_chsh_win(const ProtocolConfig& cfg);
double expected_qber(const ProtocolConfig& cfg);
/// Honest A–B test behavior.
Behavior expected_ab_behavior(const ProtocolConfig& cfg);

struct SiftSummary {
  std::uint64_t key_rounds = 0;
  double expected_fraction = 0.0;  ///< 1 - gamma
  double expected_count = 0.0;
  double sigma = 0.0;              ///< binomial standard deviation
  double alternative_count = 0.0;  ///< gamma t_a t_b p_a p_b N
};

SiftSummary sift(const ProtocolTranscript& t, const ProtocolConfig& cfg);

/// N h - alpha / (alpha - 1) log2(1 / p_omega)
double finite_size_bound(double n, double h_alpha, double alpha, double p_omega);

/// D(q||p) / (alpha - 1) + q(⊥) h_down, with ⊥ the last symbol.
double single_round_objective(const ClassicalDistribution& q, const ClassicalDistribution& p, double alpha,
                              double h_down);

struct EndToEndOptions {
  double alpha = 1.01;
  double p_omega = 1e-10;
  bool asymptotic = false;  ///< use honest-model statistics and no finite-size penalty
  RelaxedOptions relaxed;
};

struct EndToEndReport {
  double win_af = 0.0;
  double win_bg = 0.0;
  double deficit_af = 0.0;
  double deficit_bg = 0.0;
  double eps_a = 0.0;
  double eps_b = 0.0;
  double eps_prob = 0.0;
  double relaxed = 0.0;
  double continuity = 0.0;
  double lifted_entropy = 0.0;
  double qber_key = 0.0;
  double leak = 0.0;  ///< h2(qber_key)
  double penalty = 0.0;  ///< per round
  double rate = 0.0;
};

/// Throws RejectedTranscript when the transcript was not accepted.
EndToEndReport end_to_end_rate(const ProtocolTranscript& t, const ProtocolConfig& cfg,
                               const EndToEndOptions& opts = {});

}  // namespace rbqkd
