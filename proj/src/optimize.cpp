#include "rbqkd/optimize.hpp"

#include <cmath>
#include <limits>

namespace rbqkd::opt {

BfgsResult bfgs(const Objective& f, Eigen::VectorXd x0, const BfgsOptions& opts) {
  const Eigen::Index n = x0.size();
  Eigen::VectorXd x = std::move(x0);
  Eigen::VectorXd g(n);
  double fx = f(x, g);
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd g_new(n);
  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    if (!std::isfinite(fx) || g.lpNorm<Eigen::Infinity>() < opts.grad_tol) break;
    Eigen::VectorXd dir = -h * g;
    double slope = g.dot(dir);
    if (slope >= 0.0) {
      h.setIdentity();
      dir = -g;
      slope = -g.squaredNorm();
    }
    double step = 1.0;
    double f_new = 0.0;
    Eigen::VectorXd x_new;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = x + step * dir;
      f_new = f(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    x = x_new;
    const double df = fx - f_new;
    fx = f_new;
    g = g_new;
    const double sy = s.dot(y);
    if (sy > 1e-16 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd left = Eigen::MatrixXd::Identity(n, n) - rho * s * y.transpose();
      h = left * h * left.transpose() + rho * s * s.transpose();
    }
    if (s.lpNorm<Eigen::Infinity>() < opts.step_tol && df <= 0.0) break;
  }
  return BfgsResult{std::move(x), fx, iter};
}

AugLagResult augmented_lagrangian(const Objective& f, const Constraints& g, Eigen::VectorXd x0,
                                  const AugLagOptions& opts) {
  Eigen::MatrixXd jac;
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(g(x0, jac).size());
  double mu = opts.penalty;
  double last_violation = std::numeric_limits<double>::infinity();

  Eigen::VectorXd x = std::move(x0);
  for (int outer = 0; outer < opts.outer_iter; ++outer) {
    const Objective merit = [&](const Eigen::VectorXd& z, Eigen::VectorXd& grad) {
      double value = f(z, grad);
      Eigen::MatrixXd j;
      const Eigen::VectorXd c = g(z, j);
      for (Eigen::Index k = 0; k < c.size(); ++k) {
        const double shifted = lambda(k) + mu * c(k);
        if (shifted > 0.0) {
          value += (shifted * shifted - lambda(k) * lambda(k)) / (2.0 * mu);
          grad += shifted * j.row(k).transpose();
        } else {
          value -= lambda(k) * lambda(k) / (2.0 * mu);
        }
      }
      return value;
    };
    x = bfgs(merit, x, opts.inner).x;
    const Eigen::VectorXd c = g(x, jac);
    for (Eigen::Index k = 0; k < c.size(); ++k) lambda(k) = std::max(0.0, lambda(k) + mu * c(k));
    const double violation = std::max(0.0, c.maxCoeff());
    if (violation <= opts.feasibility_tol && outer > 0) break;
    if (violation > opts.progress_ratio * last_violation) mu = std::min(mu * opts.penalty_growth, opts.max_penalty);
    last_violation = violation;
  }
  Eigen::VectorXd grad(x.size());
  const double value = f(x, grad);
  const Eigen::VectorXd c = g(x, jac);
  return AugLagResult{x, value, std::max(0.0, c.maxCoeff())};
}

}  // namespace rbqkd::opt
