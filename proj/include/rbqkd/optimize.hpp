// Small smooth optimizers: BFGS with backtracking line search, and an
// augmented Lagrangian wrapper for inequality constraints g_j(x) <= 0.
#pragma once

#include <Eigen/Dense>

#include <functional>

namespace rbqkd::opt {

/// Returns f(x) and writes the gradient into `grad`.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

/// Returns g(x) and writes the Jacobian (rows = constraints) into `jac`.
using Constraints = std::function<Eigen::VectorXd(const Eigen::VectorXd& x, Eigen::MatrixXd& jac)>;

struct BfgsOptions {
  int max_iter = 500;
  double grad_tol = 1e-9;
  double step_tol = 1e-14;
};

struct BfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
};

BfgsResult bfgs(const Objective& f, Eigen::VectorXd x0, const BfgsOptions& opts = {});

struct AugLagOptions {
  double penalty = 1e4;           ///< initial penalty weight
  double penalty_growth = 10.0;   ///< applied when the violation stalls
  double progress_ratio = 0.25;   ///< required shrink factor per outer step
  double max_penalty = 1e10;
  int outer_iter = 40;
  double feasibility_tol = 1e-9;
  BfgsOptions inner;
};

struct AugLagResult {
  Eigen::VectorXd x;
  double value = 0.0;           ///< objective at x, without penalty terms
  double max_violation = 0.0;   ///< max_j max(0, g_j(x))
};

AugLagResult augmented_lagrangian(const Objective& f, const Constraints& g, Eigen::VectorXd x0,
                                  const AugLagOptions& opts = {});

}  // namespace rbqkd::opt
