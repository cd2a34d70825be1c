#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ising/model.hpp"

namespace ising::testing {

/// Dense random symmetric model with couplings uniform in [-scale, scale].
inline IsingModel random_model(Index p, std::uint64_t seed, double scale = 0.8) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  IsingModel m(p);
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j) m.set(i, j, u(gen));
  return m;
}

/// Brute-force P(X_r = +1 | rest) by summing unnormalized weights of the two
/// states that differ only in slot r. Independent of enumerate_distribution.
inline double brute_conditional(const IsingModel& m, Index r, VectorXd x) {
  auto weight = [&](const VectorXd& s) {
    double e = 0.0;
    for (Index i = 0; i < m.p(); ++i)
      for (Index j = 0; j < m.p(); ++j)
        if (i != j) e += 0.5 * m(i, j) * s[i] * s[j];
    return std::exp(e);
  };
  x[r] = 1.0;
  const double plus = weight(x);
  x[r] = -1.0;
  const double minus = weight(x);
  return plus / (plus + minus);
}

}  // namespace ising::testing
