#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "ising/model.hpp"

namespace ising {

inline constexpr Index kMaxConditionNodes = 12;

/// Which log-likelihood the Fisher matrix belongs to: the conditional of a
/// single node (`node` set, 0-based) or the stacked average over all nodes.
struct ConditionScope {
  std::optional<Index> node;

  static ConditionScope global() { return {}; }
  static ConditionScope of_node(Index r) { return {r}; }
};

/// Support-recovery conditions evaluated at the true parameter.
///
/// `fisher` is the expected negative Hessian of the scoped log-conditional
/// likelihood. Rows/columns follow the parameter order of the matching
/// estimator: other nodes in increasing index for a node scope, canonical
/// pairs for the global scope. `active` lists the indices of nonzero true
/// parameters in that order; the blocks are fisher[active, active] and
/// fisher[inactive, active].
struct ConditionReport {
  ConditionScope scope;
  MatrixXd fisher;
  std::vector<Index> active;
  std::vector<Index> inactive;
  // λ_min of the active block; +inf when the active set is empty.
  double c_min = std::numeric_limits<double>::infinity();
  // max row sum of |Q2 Q1⁻¹|; empty when Q1 is singular.
  std::optional<double> incoherence;
  // smallest |θ| on the active set; +inf when empty.
  double theta_min = std::numeric_limits<double>::infinity();
  // Largest λ at which the minimum-signal bound θ_min ≥ (10/C_min)·√d·λ holds.
  double lambda_threshold = std::numeric_limits<double>::infinity();

  Index d() const { return static_cast<Index>(active.size()); }

  bool dependency_ok() const { return c_min > 0.0; }
  bool incoherence_ok() const { return incoherence && *incoherence < 1.0; }
  bool min_signal_ok(double lambda) const {
    if (active.empty()) return true;
    return c_min > 0.0 && theta_min >= 10.0 / c_min * std::sqrt(static_cast<double>(d())) * lambda;
  }
};

namespace detail {

/// Feature vector a (length q) of node r at state x, so that the log-conditional
/// of x_r is −log(1 + exp(−x_r aᵀθ)).
inline void fill_features(const VectorXd& x, Index r, const ConditionScope& scope, VectorXd& a) {
  const Index p = x.size();
  if (scope.node) {
    for (Index l = 0, c = 0; l < p; ++l)
      if (l != r) a[c++] = 2.0 * x[l];
    return;
  }
  a.setZero();
  for (Index l = 0; l < p; ++l) {
    if (l == r) continue;
    const Index k = l < r ? pair_index(p, l, r) : pair_index(p, r, l);
    a[k] = 2.0 * x[l];
  }
}

}  // namespace detail

/// Fisher information of the node-wise or global conditional likelihood at
/// the true model, by exact enumeration of all 2^p states. p ≤ 12.
inline MatrixXd fisher_matrix(const IsingModel& model, const ConditionScope& scope) {
  const Index p = model.p();
  if (p > kMaxConditionNodes)
    throw CapacityError("fisher_matrix: p = " + std::to_string(p) + " exceeds " +
                        std::to_string(kMaxConditionNodes));
  if (scope.node && (*scope.node < 0 || *scope.node >= p))
    throw DimensionError("fisher_matrix: node index out of range");

  const StateDistribution dist = enumerate_distribution(model);
  const Index q = scope.node ? p - 1 : num_pairs(p);
  MatrixXd fisher = MatrixXd::Zero(q, q);
  VectorXd a(q);
  for (std::uint64_t k = 0; k < dist.probs.size(); ++k) {
    const VectorXd x = state_from_index(k, p);
    for (Index r = 0; r < p; ++r) {
      if (scope.node && r != *scope.node) continue;
      const double s = conditional_prob_plus(model, r, x);
      detail::fill_features(x, r, scope, a);
      fisher.noalias() += (dist.probs[k] * s * (1.0 - s)) * a * a.transpose();
    }
  }
  if (!scope.node) fisher /= static_cast<double>(p);
  return fisher;
}

inline ConditionReport fisher_blocks(const IsingModel& model, const ConditionScope& scope) {
  ConditionReport rep;
  rep.scope = scope;
  rep.fisher = fisher_matrix(model, scope);

  const Index p = model.p();
  std::vector<double> true_params;
  if (scope.node) {
    for (Index l = 0; l < p; ++l)
      if (l != *scope.node) true_params.push_back(model(l, *scope.node));
  } else {
    const EdgeVector e = pack_edges(model);
    true_params.assign(e.values.data(), e.values.data() + e.values.size());
  }
  for (Index c = 0; c < static_cast<Index>(true_params.size()); ++c) {
    if (true_params[c] != 0.0) {
      rep.active.push_back(c);
      rep.theta_min = std::min(rep.theta_min, std::abs(true_params[c]));
    } else {
      rep.inactive.push_back(c);
    }
  }

  const Index d = rep.d();
  if (d == 0) {
    rep.incoherence = 0.0;
    return rep;
  }
  MatrixXd q1(d, d);
  MatrixXd q2(static_cast<Index>(rep.inactive.size()), d);
  for (Index a = 0; a < d; ++a) {
    for (Index b = 0; b < d; ++b) q1(a, b) = rep.fisher(rep.active[a], rep.active[b]);
    for (Index c = 0; c < q2.rows(); ++c) q2(c, a) = rep.fisher(rep.inactive[c], rep.active[a]);
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(q1, Eigen::EigenvaluesOnly);
  rep.c_min = eig.eigenvalues().minCoeff();
  rep.lambda_threshold = rep.c_min > 0.0
                             ? rep.theta_min * rep.c_min / (10.0 * std::sqrt(static_cast<double>(d)))
                             : 0.0;

  const double scale = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (rep.c_min > 1e-12 * std::max(scale, 1.0)) {
    if (q2.rows() == 0) {
      rep.incoherence = 0.0;
    } else {
      const MatrixXd prod = q1.ldlt().solve(q2.transpose()).transpose();  // Q2 Q1⁻¹, Q1 symmetric
      rep.incoherence = prod.cwiseAbs().rowwise().sum().maxCoeff();
    }
  }
  return rep;
}

}  // namespace ising
