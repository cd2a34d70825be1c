#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "ising/model.hpp"
#include "ising/random.hpp"

namespace ising {

struct GibbsConfig {
  std::int64_t burn_in = 1000;  // sweeps discarded before the first retained sample
  std::int64_t thinning = 10;   // sweeps per retained sample
  std::uint64_t seed = 0;

  void validate() const {
    if (burn_in < 0) throw ConfigError("GibbsConfig: burn_in must be >= 0");
    if (thinning < 1) throw ConfigError("GibbsConfig: thinning must be >= 1");
  }
};

/// n i.i.d. draws by inverse CDF over the enumerated distribution. p ≤ 20.
inline Dataset sample_exact(const IsingModel& model, Index n, std::uint64_t seed) {
  if (n < 0) throw ConfigError("sample_exact: n must be >= 0");
  const StateDistribution dist = enumerate_distribution(model);
  std::vector<double> cdf(dist.probs.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < cdf.size(); ++k) {
    acc += dist.probs[k];
    cdf[k] = acc;
  }
  Rng rng(seed);
  MatrixXd x(n, model.p());
  for (Index i = 0; i < n; ++i) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    const auto k = static_cast<std::uint64_t>(it - cdf.begin());
    for (Index b = 0; b < model.p(); ++b) x(i, b) = ((k >> b) & 1U) ? 1.0 : -1.0;
  }
  return Dataset(std::move(x));
}

/// Systematic-scan Gibbs sampler. Each sweep updates x_1..x_p in order from
/// P(x_r | rest) using the freshest values of the other coordinates.
inline Dataset sample_gibbs(const IsingModel& model, Index n, const GibbsConfig& config) {
  config.validate();
  if (n < 1) throw ConfigError("sample_gibbs: n must be >= 1");
  const Index p = model.p();
  const MatrixXd& theta = model.theta();
  Rng rng(config.seed);

  VectorXd state(p);
  for (Index r = 0; r < p; ++r) state[r] = rng.coin() ? 1.0 : -1.0;

  auto sweep = [&] {
    for (Index r = 0; r < p; ++r) {
      const double field = 2.0 * theta.col(r).dot(state);  // θ_rr = 0
      state[r] = rng.bernoulli(logistic(field)) ? 1.0 : -1.0;
    }
  };

  for (std::int64_t s = 0; s < config.burn_in; ++s) sweep();
  MatrixXd x(n, p);
  for (Index i = 0; i < n; ++i) {
    for (std::int64_t s = 0; s < config.thinning; ++s) sweep();
    x.row(i) = state.transpose();
  }
  return Dataset(std::move(x));
}

/// Total-variation distance between the empirical state frequencies of
/// `data` and an exact distribution over the same p.
inline double total_variation(const Dataset& data, const StateDistribution& dist) {
  if (data.p() != dist.p) throw DimensionError("total_variation: p mismatch");
  std::vector<double> freq(dist.probs.size(), 0.0);
  for (Index i = 0; i < data.n(); ++i) {
    std::uint64_t k = 0;
    for (Index b = 0; b < data.p(); ++b)
      if (data.x()(i, b) > 0) k |= std::uint64_t{1} << b;
    freq[k] += 1.0;
  }
  double tv = 0.0;
  for (std::size_t k = 0; k < freq.size(); ++k)
    tv += std::abs(freq[k] / static_cast<double>(data.n()) - dist.probs[k]);
  return 0.5 * tv;
}

}  // namespace ising
