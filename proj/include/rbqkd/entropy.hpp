// Entropy functionals. Every value is in bits.
#pragma once

#include "rbqkd/core.hpp"

#include <optional>
#include <vector>

namespace rbqkd {

/// Nonnegative weights over a finite index set summing to one.
class ClassicalDistribution {
 public:
  explicit ClassicalDistribution(std::vector<double> probs);

  const std::vector<double>& probs() const { return probs_; }
  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_.at(i); }

 private:
  std::vector<double> probs_;
};

/// Classical register A correlated with quantum side information E. Outcomes
/// of probability zero carry no conditional state.
class CqState {
 public:
  CqState(std::vector<double> probs, std::vector<std::optional<DensityOperator>> conditionals);

  const std::vector<double>& probs() const { return probs_; }
  const std::vector<std::optional<DensityOperator>>& conditionals() const { return conditionals_; }
  std::size_t alphabet_size() const { return probs_.size(); }
  std::size_t e_dim() const { return e_dim_; }

  /// sum_a p_a rho_a
  ComplexMatrix e_marginal() const;
  /// The block-diagonal operator sum_a |a><a| ⊗ p_a rho_a.
  DensityOperator joint() const;

 private:
  std::vector<double> probs_;
  std::vector<std::optional<DensityOperator>> conditionals_;
  std::size_t e_dim_ = 1;
};

enum class Conditioning {
  Rest,      ///< E is every factor other than the measured one
  Purifier,  ///< E is the canonical purifying system of the whole state
};

double binary_entropy(double q);
double shannon_entropy(const std::vector<double>& probs);

double von_neumann(const ComplexMatrix& rho);
double von_neumann(const DensityOperator& rho);

/// H(A|E) = H(AE) - H(E) with A the listed factors and E the rest.
double conditional_entropy(const DensityOperator& rho_ae, const std::vector<std::size_t>& a_factors);
double conditional_entropy(const CqState& cq);

/// Measures factor `a_factor` of rho with `pvm` and keeps the listed factors
/// as E.
CqState measure_to_cq(const DensityOperator& rho, const BinaryPvm& pvm, std::size_t a_factor,
                      const std::vector<std::size_t>& e_factors);
CqState measure_to_cq(const DensityOperator& rho, const BinaryPvm& pvm, std::size_t a_factor = 0,
                      Conditioning conditioning = Conditioning::Rest);

double relative_entropy(const ClassicalDistribution& q, const ClassicalDistribution& p);

/// Sandwiched Rényi conditional entropy H_alpha^down(A|E) of a cq state,
/// conditioned on its own E marginal. alpha in (1, 10].
double renyi_down(const CqState& cq, double alpha);

/// delta log2 d + (1 + delta) h2(delta / (1 + delta)).
double continuity_f(double delta, std::size_t alphabet_size);

}  // namespace rbqkd
