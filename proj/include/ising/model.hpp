#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ising/error.hpp"

namespace ising {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Number of unordered pairs (i, j), i < j, over p nodes.
constexpr Index num_pairs(Index p) noexcept { return p * (p - 1) / 2; }

/// Position of the 0-based pair (i, j), i < j, in canonical order
/// (0,1), (0,2), ..., (0,p-1), (1,2), ..., (p-2,p-1).
constexpr Index pair_index(Index p, Index i, Index j) noexcept {
  return i * p - i * (i + 1) / 2 + (j - i - 1);
}

/// Inverse of pair_index.
inline std::pair<Index, Index> pair_at(Index p, Index k) {
  Index i = 0;
  Index row_len = p - 1;
  while (k >= row_len) {
    k -= row_len;
    ++i;
    --row_len;
  }
  return {i, i + 1 + k};
}

/// Upper-triangular coupling parameters in canonical pair order.
struct EdgeVector {
  Index p = 0;
  VectorXd values;

  EdgeVector() = default;
  EdgeVector(Index nodes, VectorXd vals) : p(nodes), values(std::move(vals)) {
    if (p < 2) throw ConfigError("EdgeVector: p must be >= 2");
    if (values.size() != num_pairs(p))
      throw DimensionError("EdgeVector: expected " + std::to_string(num_pairs(p)) +
                           " values, got " + std::to_string(values.size()));
  }
};

/// Pairwise binary Markov model with zero external field,
/// P(x) ∝ exp(xᵀΘx/2) over x ∈ {−1,+1}^p.
///
/// Θ is symmetric with a zero diagonal; both are enforced exactly at
/// construction.
class IsingModel {
 public:
  explicit IsingModel(Index p) : theta_(MatrixXd::Zero(p, p)) {
    if (p < 2) throw ConfigError("IsingModel: p must be >= 2");
  }

  explicit IsingModel(MatrixXd theta) : theta_(std::move(theta)) {
    const Index p = theta_.rows();
    if (p < 2 || theta_.cols() != p)
      throw DimensionError("IsingModel: theta must be square with p >= 2");
    for (Index i = 0; i < p; ++i) {
      if (theta_(i, i) != 0.0) throw ConfigError("IsingModel: nonzero diagonal");
      for (Index j = i + 1; j < p; ++j) {
        if (!std::isfinite(theta_(i, j)))
          throw ConfigError("IsingModel: non-finite coupling");
        if (theta_(i, j) != theta_(j, i)) throw ConfigError("IsingModel: theta not symmetric");
      }
    }
  }

  /// Builds the symmetric model whose upper triangle is `edges`.
  static IsingModel unpack(const EdgeVector& edges) {
    IsingModel m(edges.p);
    for (Index i = 0, k = 0; i < edges.p; ++i)
      for (Index j = i + 1; j < edges.p; ++j, ++k) m.set(i, j, edges.values[k]);
    return m;
  }

  Index p() const noexcept { return theta_.rows(); }
  const MatrixXd& theta() const noexcept { return theta_; }
  double operator()(Index i, Index j) const { return theta_(i, j); }

  /// Sets θij = θji. Requires i != j.
  void set(Index i, Index j, double value) {
    if (i == j) throw ConfigError("IsingModel: cannot set a diagonal entry");
    if (i < 0 || j < 0 || i >= p() || j >= p()) throw DimensionError("IsingModel: index out of range");
    if (!std::isfinite(value)) throw ConfigError("IsingModel: non-finite coupling");
    theta_(i, j) = value;
    theta_(j, i) = value;
  }

  /// Nonzero couplings of node r.
  std::vector<Index> neighbors(Index r) const {
    std::vector<Index> out;
    for (Index l = 0; l < p(); ++l)
      if (l != r && theta_(l, r) != 0.0) out.push_back(l);
    return out;
  }

  friend bool operator==(const IsingModel& a, const IsingModel& b) {
    return a.theta_.rows() == b.theta_.rows() && a.theta_ == b.theta_;
  }

 private:
  MatrixXd theta_;
};

inline EdgeVector pack_edges(const IsingModel& model) {
  const Index p = model.p();
  VectorXd values(num_pairs(p));
  for (Index i = 0, k = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j, ++k) values[k] = model(i, j);
  return EdgeVector(p, std::move(values));
}

/// n × p matrix of ±1 observations, one row per sample.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(MatrixXd x) : x_(std::move(x)) {
    if (x_.cols() < 2) throw DimensionError("Dataset: need at least 2 columns");
    for (Index j = 0; j < x_.cols(); ++j)
      for (Index i = 0; i < x_.rows(); ++i)
        if (x_(i, j) != 1.0 && x_(i, j) != -1.0)
          throw ConfigError("Dataset: entry (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") is not +1 or -1");
  }

  Index n() const noexcept { return x_.rows(); }
  Index p() const noexcept { return x_.cols(); }
  const MatrixXd& x() const noexcept { return x_; }

 private:
  MatrixXd x_;
};

inline double logistic(double s) noexcept {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

/// P(X_r = +1 | x_rest) = logistic(Σ_{l≠r} 2 θ_lr x_l). Slot r of `x` is ignored.
inline double conditional_prob_plus(const IsingModel& model, Index r, const VectorXd& x) {
  if (r < 0 || r >= model.p()) throw DimensionError("conditional_prob_plus: node index out of range");
  if (x.size() != model.p()) throw DimensionError("conditional_prob_plus: state has wrong length");
  double field = 0.0;
  for (Index l = 0; l < model.p(); ++l)
    if (l != r) field += 2.0 * model(l, r) * x[l];
  return logistic(field);
}

/// Σ_{i<j} θij xi xj, which equals xᵀΘx/2.
inline double pair_energy(const IsingModel& model, const VectorXd& x) {
  double e = 0.0;
  for (Index i = 0; i < model.p(); ++i)
    for (Index j = i + 1; j < model.p(); ++j) e += model(i, j) * x[i] * x[j];
  return e;
}

inline constexpr Index kMaxEnumerationNodes = 20;

/// State k ↦ x with x_b = +1 when bit b of k is set, −1 otherwise.
inline VectorXd state_from_index(std::uint64_t k, Index p) {
  VectorXd x(p);
  for (Index b = 0; b < p; ++b) x[b] = ((k >> b) & 1U) ? 1.0 : -1.0;
  return x;
}

struct StateDistribution {
  Index p = 0;
  std::vector<double> probs;  // indexed by state_from_index order
  double log_z = 0.0;
};

/// Exact distribution over all 2^p states. p ≤ 20.
inline StateDistribution enumerate_distribution(const IsingModel& model) {
  const Index p = model.p();
  if (p > kMaxEnumerationNodes)
    throw CapacityError("enumerate_distribution: p = " + std::to_string(p) + " exceeds " +
                        std::to_string(kMaxEnumerationNodes));
  const std::uint64_t states = std::uint64_t{1} << p;
  StateDistribution dist;
  dist.p = p;
  dist.probs.resize(states);

  // Energies first, then a single log-sum-exp pass.
  double max_energy = -std::numeric_limits<double>::infinity();
  VectorXd x(p);
  for (std::uint64_t k = 0; k < states; ++k) {
    for (Index b = 0; b < p; ++b) x[b] = ((k >> b) & 1U) ? 1.0 : -1.0;
    const double e = pair_energy(model, x);
    dist.probs[k] = e;
    if (e > max_energy) max_energy = e;
  }
  double sum = 0.0;
  for (double& v : dist.probs) {
    v = std::exp(v - max_energy);
    sum += v;
  }
  for (double& v : dist.probs) v /= sum;
  dist.log_z = max_energy + std::log(sum);
  return dist;
}

/// log P(x) = xᵀΘx/2 − log Z, with `log_z` taken from enumerate_distribution.
inline double joint_log_prob(const IsingModel& model, const VectorXd& x, double log_z) {
  if (x.size() != model.p()) throw DimensionError("joint_log_prob: state has wrong length");
  return 0.5 * x.dot(model.theta() * x) - log_z;
}

}  // namespace ising
