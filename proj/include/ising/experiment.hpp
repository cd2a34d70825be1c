#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "ising/estimators.hpp"
#include "ising/metrics.hpp"
#include "ising/random.hpp"
#include "ising/sampler.hpp"

namespace ising {

enum class SamplerKind { Auto, Exact, Gibbs };

/// Random sparse model: exactly round(density·p(p−1)/2) canonical pairs,
/// drawn uniformly without replacement, each set to ±magnitude with equal
/// probability.
inline IsingModel generate_mixed_coupling(Index p, double density, double magnitude, std::uint64_t seed) {
  if (p < 2) throw ConfigError("generate_mixed_coupling: p must be >= 2");
  if (!(density > 0.0 && density <= 1.0)) throw ConfigError("generate_mixed_coupling: density must be in (0, 1]");
  if (!std::isfinite(magnitude)) throw ConfigError("generate_mixed_coupling: magnitude must be finite");
  const Index pairs = num_pairs(p);
  const auto edges = static_cast<Index>(std::llround(density * static_cast<double>(pairs)));
  if (edges == 0)
    throw ConfigError("generate_mixed_coupling: density " + std::to_string(density) + " gives no edges at p = " +
                      std::to_string(p));

  Rng rng(seed);
  std::vector<Index> order(static_cast<std::size_t>(pairs));
  for (Index k = 0; k < pairs; ++k) order[static_cast<std::size_t>(k)] = k;
  // Partial Fisher-Yates: the first `edges` slots become the support.
  for (Index k = 0; k < edges; ++k) {
    const auto pick = k + static_cast<Index>(rng.below(static_cast<std::uint64_t>(pairs - k)));
    std::swap(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(pick)]);
  }
  IsingModel model(p);
  for (Index k = 0; k < edges; ++k) {
    const auto [i, j] = pair_at(p, order[static_cast<std::size_t>(k)]);
    model.set(i, j, rng.coin() ? magnitude : -magnitude);
  }
  return model;
}

struct ExperimentConfig {
  Index p = 10;
  double density = 0.2;
  double coupling_magnitude = 0.5;
  std::vector<Index> n_list{100, 250, 500, 1000};
  int replicates = 20;
  std::vector<MethodId> methods{MethodId::NLm, MethodId::NLM, MethodId::GL};
  std::uint64_t master_seed = 20190501;
  // Fixed-model mode: the same truth for every replicate, drawn from
  // model_seed (or a seed derived from master_seed when unset).
  std::optional<std::uint64_t> model_seed;
  bool fresh_model = false;
  SamplerKind sampler = SamplerKind::Auto;
  GibbsConfig gibbs;  // seed is replaced per replicate
  LambdaChoice lambda_override;
  double eps = kDefaultSupportEps;
  // Off by default so that record streams are byte-reproducible.
  bool record_timing = false;
  unsigned threads = 0;  // 0 = hardware concurrency

  void validate() const {
    if (p < 2) throw ConfigError("experiment: p must be >= 2");
    if (!(density > 0.0 && density <= 1.0)) throw ConfigError("experiment: density must be in (0, 1]");
    if (replicates < 1) throw ConfigError("experiment: replicates must be >= 1");
    if (n_list.empty()) throw ConfigError("experiment: n_list must be nonempty");
    for (Index n : n_list)
      if (n < 1) throw ConfigError("experiment: every n must be >= 1");
    if (methods.empty()) throw ConfigError("experiment: methods must be nonempty");
    if (!(eps >= 0.0)) throw ConfigError("experiment: eps must be >= 0");
    if (lambda_override.nodewise && !(*lambda_override.nodewise >= 0.0))
      throw ConfigError("experiment: lambda override must be >= 0");
    if (lambda_override.global && !(*lambda_override.global >= 0.0))
      throw ConfigError("experiment: lambda override must be >= 0");
    gibbs.validate();
    if (sampler == SamplerKind::Exact && p > kMaxEnumerationNodes)
      throw CapacityError("experiment: exact sampling needs p <= " + std::to_string(kMaxEnumerationNodes));
  }
};

struct ExperimentRecord {
  MethodId method;
  Index p = 0;
  Index n = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double err = 0.0;
  int solver_iterations = 0;
  bool converged = false;
  double wall_time_seconds = 0.0;
};

/// Stage tags mixed into derive_seed(master, {p, n, replicate, tag}).
enum SeedStage : std::uint64_t { kModelStage = 1, kDataStage = 2 };

/// Seed for the dataset of one (n, replicate) work item.
inline std::uint64_t data_seed(const ExperimentConfig& c, Index n, int replicate) {
  return derive_seed(c.master_seed, {static_cast<std::uint64_t>(c.p), static_cast<std::uint64_t>(n),
                                     static_cast<std::uint64_t>(replicate), kDataStage});
}

/// Seed for the ground truth. Fresh models depend on the replicate only, so
/// every n in n_list sees the same truth for a given replicate.
inline std::uint64_t model_seed(const ExperimentConfig& c, int replicate) {
  if (!c.fresh_model && c.model_seed) return *c.model_seed;
  const std::uint64_t rep = c.fresh_model ? static_cast<std::uint64_t>(replicate) : 0;
  return derive_seed(c.master_seed, {static_cast<std::uint64_t>(c.p), 0, rep, kModelStage});
}

inline Dataset draw_dataset(const ExperimentConfig& c, const IsingModel& truth, Index n, std::uint64_t seed) {
  const bool exact = c.sampler == SamplerKind::Exact ||
                     (c.sampler == SamplerKind::Auto && truth.p() <= kMaxEnumerationNodes);
  if (exact) return sample_exact(truth, n, seed);
  GibbsConfig g = c.gibbs;
  g.seed = seed;
  return sample_gibbs(truth, n, g);
}

/// Records for one (n, replicate) work item, in config method order.
inline std::vector<ExperimentRecord> run_replicate(const ExperimentConfig& c, Index n, int replicate,
                                                   const SolverOptions& options = {}) {
  using clock = std::chrono::steady_clock;
  const IsingModel truth =
      generate_mixed_coupling(c.p, c.density, c.coupling_magnitude, model_seed(c, replicate));
  const std::uint64_t seed = data_seed(c, n, replicate);
  const Dataset data = draw_dataset(c, truth, n, seed);

  std::optional<NodewiseRaw> raw;
  double raw_seconds = 0.0;
  const double node_lambda = c.lambda_override.nodewise.value_or(default_nodewise_lambda(c.p, n));

  std::vector<ExperimentRecord> out;
  for (MethodId m : c.methods) {
    const auto start = clock::now();
    bool reused = false;
    Estimate est = [&] {
      if (m == MethodId::GL) return fit_method(m, data, c.lambda_override, options);
      if (raw) {
        reused = true;
      } else {
        raw = fit_nodewise(data, node_lambda, options);
        raw_seconds = std::chrono::duration<double>(clock::now() - start).count();
      }
      return nodewise_estimate(m, *raw, node_lambda);
    }();
    double seconds = std::chrono::duration<double>(clock::now() - start).count();
    if (reused) seconds += raw_seconds;  // both symmetrizations share one node-wise solve

    ExperimentRecord rec;
    rec.method = m;
    rec.p = c.p;
    rec.n = n;
    rec.replicate = replicate;
    rec.seed = seed;
    rec.accuracy = accuracy(truth, est.model, c.eps).accuracy;
    rec.err = err(truth, est.model);
    rec.solver_iterations = est.iterations;
    rec.converged = est.converged;
    rec.wall_time_seconds = c.record_timing ? seconds : 0.0;
    out.push_back(rec);
  }
  return out;
}

/// All records, ordered by (n_list position, replicate, method position).
/// The order and contents do not depend on the thread count.
inline std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& c, const SolverOptions& options = {}) {
  c.validate();
  const std::size_t items = c.n_list.size() * static_cast<std::size_t>(c.replicates);
  std::vector<std::vector<ExperimentRecord>> slots(items);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t it = next++; it < items; it = next++) {
      const Index n = c.n_list[it / static_cast<std::size_t>(c.replicates)];
      const int rep = static_cast<int>(it % static_cast<std::size_t>(c.replicates));
      slots[it] = run_replicate(c, n, rep, options);
    }
  };
  unsigned threads = c.threads ? c.threads : std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, items));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::vector<ExperimentRecord> records;
  records.reserve(items * c.methods.size());
  for (auto& s : slots) records.insert(records.end(), s.begin(), s.end());
  return records;
}

/// Quantile by linear interpolation between order statistics (inclusive):
/// h = (N − 1)·q, value = x[⌊h⌋] + (h − ⌊h⌋)(x[⌊h⌋+1] − x[⌊h⌋]).
/// `sorted` must be ascending and nonempty.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw ConfigError("quantile: empty sample");
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

struct SummaryStats {
  double mean = 0.0, median = 0.0, q1 = 0.0, q3 = 0.0, iqr = 0.0;
};

inline SummaryStats describe(std::vector<double> values) {
  if (values.empty()) throw ConfigError("describe: empty sample");
  std::sort(values.begin(), values.end());
  SummaryStats s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  s.median = quantile_sorted(values, 0.5);
  s.q1 = quantile_sorted(values, 0.25);
  s.q3 = quantile_sorted(values, 0.75);
  s.iqr = s.q3 - s.q1;
  return s;
}

struct SummaryRow {
  MethodId method;
  Index n = 0;
  std::size_t count = 0;
  SummaryStats accuracy;
  SummaryStats err;
};

/// Per-(method, n) statistics, ordered by method (N-L-m, N-L-M, G-L) then n.
inline std::vector<SummaryRow> summarize(const std::vector<ExperimentRecord>& records) {
  if (records.empty()) throw ConfigError("summarize: no records");
  std::map<std::pair<int, Index>, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (const auto& r : records) {
    auto& g = groups[{static_cast<int>(r.method), r.n}];
    g.first.push_back(r.accuracy);
    g.second.push_back(r.err);
  }
  std::vector<SummaryRow> rows;
  for (auto& [key, g] : groups) {
    SummaryRow row;
    row.method = static_cast<MethodId>(key.first);
    row.n = key.second;
    row.count = g.first.size();
    row.accuracy = describe(std::move(g.first));
    row.err = describe(std::move(g.second));
    rows.push_back(row);
  }
  return rows;
}

/// Mean of a field over records matching (method, n).
template <class Field>
double mean_of(const std::vector<ExperimentRecord>& records, MethodId m, Index n, Field field) {
  double sum = 0.0;
  int count = 0;
  for (const auto& r : records)
    if (r.method == m && r.n == n) {
      sum += field(r);
      ++count;
    }
  return count ? sum / count : std::nan("");
}

}  // namespace ising
