#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "ising/model.hpp"

namespace ising {

inline constexpr double kDefaultSupportEps = 1e-8;

/// Canonical pairs (i, j), i < j, with |θij| > eps, in canonical order.
inline std::vector<std::pair<Index, Index>> support_threshold(const IsingModel& model, double eps) {
  if (!(eps >= 0.0)) throw ConfigError("support_threshold: eps must be >= 0");
  std::vector<std::pair<Index, Index>> out;
  for (Index i = 0; i < model.p(); ++i)
    for (Index j = i + 1; j < model.p(); ++j)
      if (std::abs(model(i, j)) > eps) out.emplace_back(i, j);
  return out;
}

struct ConfusionCounts {
  Index tp = 0, tn = 0, fp = 0, fn = 0;

  Index total() const { return tp + tn + fp + fn; }
};

struct AccuracyResult {
  ConfusionCounts counts;
  double accuracy = 0.0;
};

/// Edge-decision accuracy (TP + TN) / (TP + TN + FP + FN) over all canonical pairs.
inline AccuracyResult accuracy(const IsingModel& truth, const IsingModel& estimate,
                               double eps = kDefaultSupportEps) {
  if (truth.p() != estimate.p()) throw DimensionError("accuracy: models have different p");
  if (!(eps >= 0.0)) throw ConfigError("accuracy: eps must be >= 0");
  AccuracyResult r;
  for (Index i = 0; i < truth.p(); ++i)
    for (Index j = i + 1; j < truth.p(); ++j) {
      const bool actual = std::abs(truth(i, j)) > eps;
      const bool found = std::abs(estimate(i, j)) > eps;
      if (actual && found) ++r.counts.tp;
      else if (!actual && !found) ++r.counts.tn;
      else if (found) ++r.counts.fp;
      else ++r.counts.fn;
    }
  r.accuracy = static_cast<double>(r.counts.tp + r.counts.tn) / static_cast<double>(r.counts.total());
  return r;
}

/// Σ_{i<j} (θij − θ̂ij)². Not square-rooted.
inline double err(const IsingModel& truth, const IsingModel& estimate) {
  if (truth.p() != estimate.p()) throw DimensionError("err: models have different p");
  double sum = 0.0;
  for (Index i = 0; i < truth.p(); ++i)
    for (Index j = i + 1; j < truth.p(); ++j) {
      const double d = truth(i, j) - estimate(i, j);
      sum += d * d;
    }
  return sum;
}

}  // namespace ising
