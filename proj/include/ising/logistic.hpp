#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "ising/error.hpp"

namespace ising {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using SparseDesign = Eigen::SparseMatrix<double, Eigen::ColMajor>;

/// Intercept-free l1-penalized logistic regression
///
///   minimize  (1/m) Σ_i log(1 + exp(−y_i a_iᵀβ)) + λ‖β‖₁
///
/// with rows a_i of `design` and y_i ∈ {−1,+1}. `Design` is any Eigen matrix
/// type supporting `design * v` and `design.transpose() * w`; the estimators
/// use the sparse column-compressed form.
template <class Design = SparseDesign>
struct LogisticProblem {
  Design design;
  VectorXd response;
  double lambda = 0.0;

  Index rows() const { return design.rows(); }
  Index cols() const { return design.cols(); }

  void validate() const {
    if (design.rows() < 1 || design.cols() < 1)
      throw DimensionError("LogisticProblem: design must be at least 1x1");
    if (response.size() != design.rows())
      throw DimensionError("LogisticProblem: response length does not match design rows");
    for (Index i = 0; i < response.size(); ++i)
      if (response[i] != 1.0 && response[i] != -1.0)
        throw ConfigError("LogisticProblem: responses must be +1 or -1");
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
      throw ConfigError("LogisticProblem: lambda must be finite and >= 0");
  }
};

template <class Design>
LogisticProblem(Design, VectorXd, double) -> LogisticProblem<Design>;

struct FitResult {
  VectorXd beta;
  int iterations = 0;
  double objective = 0.0;
  double kkt_residual = 0.0;
  bool converged = false;
  std::vector<double> history;  // accepted objective per iteration, if requested
};

struct SolverOptions {
  double initial_step = 1.0;
  double backtrack_factor = 0.5;
  double kkt_tol = 1e-6;
  double rel_objective_tol = 1e-9;
  // Consecutive iterations with relative objective change below
  // rel_objective_tol and no new best KKT residual before the run is
  // abandoned as stalled.
  int stall_iterations = 200;
  int max_iterations = 50000;
  bool record_history = false;
};

/// log(1 + exp(−t)), without overflow.
inline double log1p_exp_neg(double t) noexcept {
  return t > 0.0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
}

/// σ(−t) = 1 / (1 + exp(t)).
inline double logistic_neg(double t) noexcept {
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

namespace detail {

// Compensated (Neumaier) sum: near the optimum the objective changes by far
// less than the rounding error of a plain sum over many rows, and the line
// search and restart tests compare such sums directly.
inline double loss_from_margins(const VectorXd& response, const VectorXd& margins) {
  double sum = 0.0, carry = 0.0;
  for (Index i = 0; i < margins.size(); ++i) {
    const double v = log1p_exp_neg(response[i] * margins[i]);
    const double t = sum + v;
    carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return (sum + carry) / static_cast<double>(margins.size());
}

template <class Design>
VectorXd gradient_from_margins(const LogisticProblem<Design>& problem, const VectorXd& margins) {
  const Index m = margins.size();
  VectorXd w(m);
  for (Index i = 0; i < m; ++i) {
    const double y = problem.response[i];
    w[i] = -y * logistic_neg(y * margins[i]);
  }
  VectorXd g = problem.design.transpose() * w;
  g /= static_cast<double>(m);
  return g;
}

}  // namespace detail

/// Smooth part of the objective and its gradient
/// −(1/m) Σ_i y_i σ(−y_i a_iᵀβ) a_i.
template <class Design>
std::pair<double, VectorXd> loss_and_gradient(const LogisticProblem<Design>& problem,
                                              const VectorXd& beta) {
  if (beta.size() != problem.cols())
    throw DimensionError("loss_and_gradient: beta length does not match design columns");
  if (problem.response.size() != problem.rows())
    throw DimensionError("loss_and_gradient: response length does not match design rows");
  const VectorXd margins = problem.design * beta;
  return {detail::loss_from_margins(problem.response, margins),
          detail::gradient_from_margins(problem, margins)};
}

inline double soft_threshold(double v, double t) noexcept {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

/// Largest violation of the l1 optimality conditions:
///   β_j ≠ 0:  |g_j + λ sign(β_j)|
///   β_j = 0:  max(|g_j| − λ, 0)
inline double kkt_residual(const VectorXd& gradient, const VectorXd& beta, double lambda) {
  double worst = 0.0;
  for (Index j = 0; j < beta.size(); ++j) {
    const double v = beta[j] != 0.0 ? std::abs(gradient[j] + std::copysign(lambda, beta[j]))
                                    : std::max(std::abs(gradient[j]) - lambda, 0.0);
    worst = std::max(worst, v);
  }
  return worst;
}

/// Smallest λ for which β = 0 is optimal: max_j |∇_j loss(0)|.
template <class Design>
double lambda_max(const LogisticProblem<Design>& problem) {
  return loss_and_gradient(problem, VectorXd::Zero(problem.cols())).second.cwiseAbs().maxCoeff();
}

template <class Design>
double objective(const LogisticProblem<Design>& problem, const VectorXd& beta) {
  return loss_and_gradient(problem, beta).first + problem.lambda * beta.lpNorm<1>();
}

/// Accelerated proximal gradient with backtracking and function-value
/// restart. A momentum step that would increase the objective is discarded
/// and the momentum reset, so accepted objectives never increase.
///
/// Stops when the KKT residual reaches `kkt_tol` (converged), or when
/// progress stalls or the iteration budget runs out (not converged).
template <class Design>
FitResult solve(const LogisticProblem<Design>& problem, std::optional<VectorXd> init = std::nullopt,
                const SolverOptions& options = {}) {
  problem.validate();
  const Index q = problem.cols();
  const double lambda = problem.lambda;
  VectorXd x = init ? std::move(*init) : VectorXd::Zero(q);
  if (x.size() != q) throw DimensionError("solve: initial point has wrong length");

  auto penalized = [&](double loss, const VectorXd& b) { return loss + lambda * b.lpNorm<1>(); };

  VectorXd margins_x = problem.design * x;
  double loss_x = detail::loss_from_margins(problem.response, margins_x);
  VectorXd grad_x = detail::gradient_from_margins(problem, margins_x);
  double obj_x = penalized(loss_x, x);

  FitResult result;
  if (options.record_history) result.history.push_back(obj_x);
  result.kkt_residual = kkt_residual(grad_x, x, lambda);
  if (result.kkt_residual <= options.kkt_tol) {
    result.beta = std::move(x);
    result.objective = obj_x;
    result.converged = true;
    return result;
  }

  VectorXd y = x, margins_y = margins_x, grad_y = grad_x;
  double loss_y = loss_x;
  double momentum = 1.0;
  double step = options.initial_step;
  int stalled = 0;
  double best_kkt = result.kkt_residual;

  VectorXd z(q), margins_z, d(q);
  int it = 0;
  while (it < options.max_iterations) {
    ++it;
    double loss_z;
    for (;;) {
      for (Index j = 0; j < q; ++j) z[j] = soft_threshold(y[j] - step * grad_y[j], step * lambda);
      margins_z = problem.design * z;
      loss_z = detail::loss_from_margins(problem.response, margins_z);
      d = z - y;
      const double model =
          loss_y + grad_y.dot(d) + d.squaredNorm() / (2.0 * step) + 1e-15 * std::abs(loss_y);
      if (loss_z <= model || step < 1e-20) break;
      step *= options.backtrack_factor;
    }
    const double obj_z = penalized(loss_z, z);
    const double prev_obj = obj_x;

    if (obj_z <= obj_x) {
      const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
      const double beta = (momentum - 1.0) / next_momentum;
      y = z + beta * (z - x);
      margins_y = margins_z + beta * (margins_z - margins_x);
      x = z;
      margins_x = margins_z;
      loss_x = loss_z;
      obj_x = obj_z;
      grad_x = detail::gradient_from_margins(problem, margins_x);
      momentum = next_momentum;
      if (beta != 0.0) {
        loss_y = detail::loss_from_margins(problem.response, margins_y);
        grad_y = detail::gradient_from_margins(problem, margins_y);
      } else {
        loss_y = loss_x;
        grad_y = grad_x;
      }
    } else {
      // Restart from the last accepted iterate.
      momentum = 1.0;
      y = x;
      margins_y = margins_x;
      loss_y = loss_x;
      grad_y = grad_x;
    }

    if (options.record_history) result.history.push_back(obj_x);
    result.kkt_residual = kkt_residual(grad_x, x, lambda);
    if (result.kkt_residual <= options.kkt_tol) {
      result.converged = true;
      break;
    }
    const double rel_change = std::abs(prev_obj - obj_x) / std::max(1.0, std::abs(obj_x));
    const bool improved = result.kkt_residual < best_kkt;
    best_kkt = std::min(best_kkt, result.kkt_residual);
    stalled = rel_change < options.rel_objective_tol && !improved ? stalled + 1 : 0;
    if (stalled >= options.stall_iterations) break;
  }

  result.beta = std::move(x);
  result.iterations = it;
  result.objective = obj_x;
  return result;
}

}  // namespace ising
