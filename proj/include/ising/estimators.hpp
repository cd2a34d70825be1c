#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ising/logistic.hpp"
#include "ising/model.hpp"

namespace ising {

enum class MethodId { NLm, NLM, GL };

inline constexpr MethodId kAllMethods[] = {MethodId::NLm, MethodId::NLM, MethodId::GL};

/// Display name used in CSV records and JSON output.
inline std::string_view method_name(MethodId m) {
  switch (m) {
    case MethodId::NLm: return "N-L-m";
    case MethodId::NLM: return "N-L-M";
    case MethodId::GL: return "G-L";
  }
  return "?";
}

/// Accepts the CLI spellings (nlm, nlM, gl) and the display names.
inline MethodId parse_method(std::string_view s) {
  if (s == "nlm" || s == "NLm" || s == "N-L-m") return MethodId::NLm;
  if (s == "nlM" || s == "NLM" || s == "N-L-M") return MethodId::NLM;
  if (s == "gl" || s == "GL" || s == "G-L") return MethodId::GL;
  throw ConfigError("unknown method '" + std::string(s) + "' (expected nlm, nlM or gl)");
}

/// Per-node λ_r = √(log(p−1)/n).
inline double default_nodewise_lambda(Index p, Index n) {
  return std::sqrt(std::log(static_cast<double>(p - 1)) / static_cast<double>(n));
}

/// Global λ = √(log(p(p−1)/2)/(p·n)).
inline double default_global_lambda(Index p, Index n) {
  return std::sqrt(std::log(static_cast<double>(num_pairs(p))) /
                   (static_cast<double>(p) * static_cast<double>(n)));
}

/// Column r holds the coefficients from regressing X_r on the other nodes.
/// Generally not symmetric.
struct NodewiseRaw {
  MatrixXd theta_hat;
  std::vector<FitResult> fits;  // one per node; beta is cleared after unpacking

  Index p() const { return theta_hat.rows(); }
  bool converged() const {
    for (const auto& f : fits)
      if (!f.converged) return false;
    return true;
  }
  int iterations() const {
    int total = 0;
    for (const auto& f : fits) total += f.iterations;
    return total;
  }
};

/// Design for node r: columns 2·x_l for l ≠ r in increasing l; response x_r.
inline LogisticProblem<SparseDesign> nodewise_problem(const Dataset& data, Index r, double lambda) {
  const Index n = data.n(), p = data.p();
  SparseDesign design(n, p - 1);
  design.reserve(Eigen::VectorXi::Constant(p - 1, static_cast<int>(n)));
  for (Index l = 0, c = 0; l < p; ++l) {
    if (l == r) continue;
    for (Index i = 0; i < n; ++i) design.insert(i, c) = 2.0 * data.x()(i, l);
    ++c;
  }
  design.makeCompressed();
  return {std::move(design), data.x().col(r), lambda};
}

inline NodewiseRaw fit_nodewise(const Dataset& data, const VectorXd& lambdas,
                                const SolverOptions& options = {}) {
  const Index p = data.p();
  if (data.n() < 1) throw ConfigError("fit_nodewise: need at least one sample");
  if (lambdas.size() != p) throw DimensionError("fit_nodewise: need one lambda per node");
  NodewiseRaw raw{MatrixXd::Zero(p, p), {}};
  raw.fits.reserve(p);
  for (Index r = 0; r < p; ++r) {
    FitResult fit = solve(nodewise_problem(data, r, lambdas[r]), std::nullopt, options);
    for (Index l = 0, c = 0; l < p; ++l) {
      if (l == r) continue;
      raw.theta_hat(l, r) = fit.beta[c++];
    }
    fit.beta.resize(0);
    raw.fits.push_back(std::move(fit));
  }
  return raw;
}

inline NodewiseRaw fit_nodewise(const Dataset& data, double lambda, const SolverOptions& options = {}) {
  return fit_nodewise(data, VectorXd::Constant(data.p(), lambda), options);
}

namespace detail {

template <class Keep>
IsingModel symmetrize(const NodewiseRaw& raw, Keep keep_first) {
  const Index p = raw.p();
  IsingModel out(p);
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j) {
      const double a = raw.theta_hat(i, j), b = raw.theta_hat(j, i);
      out.set(i, j, keep_first(std::abs(a), std::abs(b)) ? a : b);
    }
  return out;
}

}  // namespace detail

/// Per pair, keeps the entry of smaller magnitude (ties keep θ̂_ij, i < j).
inline IsingModel symmetrize_min(const NodewiseRaw& raw) {
  return detail::symmetrize(raw, [](double a, double b) { return a <= b; });
}

/// Per pair, keeps the entry of larger magnitude (ties keep θ̂_ij, i < j).
inline IsingModel symmetrize_max(const NodewiseRaw& raw) {
  return detail::symmetrize(raw, [](double a, double b) { return a >= b; });
}

/// Stacked problem with one shared parameter per canonical pair.
///
/// Rows [r·n, (r+1)·n) hold node r: response x_r and, for pair (i, j),
/// entry 2·x_j when r == i, 2·x_i when r == j, 0 otherwise. Every row has
/// p−1 nonzeros and every column 2n.
inline LogisticProblem<SparseDesign> build_global_design(const Dataset& data, double lambda = 0.0) {
  const Index n = data.n(), p = data.p();
  if (n < 1) throw ConfigError("build_global_design: need at least one sample");
  const Index q = num_pairs(p);
  SparseDesign design(n * p, q);
  design.reserve(Eigen::VectorXi::Constant(q, static_cast<int>(2 * n)));
  for (Index i = 0, k = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j, ++k) {
      // Block i precedes block j, so row indices stay sorted within the column.
      for (Index s = 0; s < n; ++s) design.insert(i * n + s, k) = 2.0 * data.x()(s, j);
      for (Index s = 0; s < n; ++s) design.insert(j * n + s, k) = 2.0 * data.x()(s, i);
    }
  design.makeCompressed();
  VectorXd response(n * p);
  for (Index r = 0; r < p; ++r) response.segment(r * n, n) = data.x().col(r);
  return {std::move(design), std::move(response), lambda};
}

struct GlobalFit {
  IsingModel model;
  FitResult fit;
};

inline GlobalFit fit_global(const Dataset& data, double lambda, const SolverOptions& options = {}) {
  FitResult fit = solve(build_global_design(data, lambda), std::nullopt, options);
  IsingModel model = IsingModel::unpack(EdgeVector(data.p(), fit.beta));
  return {std::move(model), std::move(fit)};
}

/// One estimate with the diagnostics reported alongside it.
struct Estimate {
  MethodId method;
  IsingModel model;
  double lambda = 0.0;  // the global λ for G-L, the (common) node λ otherwise
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;     // G-L only; NaN for node-wise methods
  double kkt_residual = 0.0;  // worst over the underlying solves
};

struct LambdaChoice {
  std::optional<double> nodewise;
  std::optional<double> global;
};

/// Symmetrized estimate from an existing node-wise fit. `method` is NLm or NLM.
inline Estimate nodewise_estimate(MethodId method, const NodewiseRaw& raw, double lambda) {
  if (method == MethodId::GL) throw ConfigError("nodewise_estimate: G-L is not a node-wise method");
  double worst_kkt = 0.0;
  for (const auto& f : raw.fits) worst_kkt = std::max(worst_kkt, f.kkt_residual);
  IsingModel model = method == MethodId::NLm ? symmetrize_min(raw) : symmetrize_max(raw);
  return {method,          std::move(model), lambda, raw.iterations(),
          raw.converged(), std::nan(""),     worst_kkt};
}

/// Fits one method with default λ unless overridden.
inline Estimate fit_method(MethodId method, const Dataset& data, const LambdaChoice& lambdas = {},
                           const SolverOptions& options = {}) {
  if (method == MethodId::GL) {
    const double lambda = lambdas.global.value_or(default_global_lambda(data.p(), data.n()));
    GlobalFit g = fit_global(data, lambda, options);
    return {method, std::move(g.model), lambda, g.fit.iterations, g.fit.converged, g.fit.objective,
            g.fit.kkt_residual};
  }
  const double lambda = lambdas.nodewise.value_or(default_nodewise_lambda(data.p(), data.n()));
  return nodewise_estimate(method, fit_nodewise(data, lambda, options), lambda);
}

}  // namespace ising
