#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "scw/core.hpp"
#include "scw/data.hpp"
#include "scw/learners.hpp"

namespace scw {

struct CurvePoint {
  std::size_t t = 0;
  std::uint64_t cum_mistakes = 0;
  std::uint64_t cum_updates = 0;
  double elapsed_seconds = 0.0;
};

/// One single-pass run: cumulative counts sampled along the stream plus the
/// final metrics. `elapsed_seconds` covers the learning loop only.
struct OnlineTrace {
  std::size_t n = 0;
  std::uint64_t mistakes = 0;
  double final_mistake_rate = 0.0;
  std::uint64_t update_count = 0;
  double elapsed_seconds = 0.0;
  double cum_alpha2v = 0.0;
  std::uint64_t clamp_events = 0;
  std::uint64_t floor_events = 0;
  std::vector<CurvePoint> curve;
};

struct RunOptions {
  std::size_t stride = 200;      // number of evenly spaced curve samples
  CovMode cov_mode = CovMode::Full;
};

inline CovMode resolve_cov_mode(LearnerKind kind, Eigen::Index dim,
                                const std::string& requested) {
  if (requested == "full") return CovMode::Full;
  if (requested == "diag") return CovMode::Diagonal;
  if (requested == "auto" || requested.empty()) {
    if (!is_second_order(kind)) return CovMode::Diagonal;  // covariance untouched
    return dim <= 1024 ? CovMode::Full : CovMode::Diagonal;
  }
  throw ConfigError("unknown covariance mode '" + requested + "'");
}

/// Single pass of the online protocol: predict, reveal label, update per the
/// kind's trigger.
inline OnlineTrace run_online(LearnerKind kind, const HyperParams& params,
                              const Dataset& stream, const RunOptions& opts = {}) {
  if (stream.examples.empty()) throw ConfigError("run_online: empty stream");
  const std::size_t n = stream.size();

  // Evenly spaced sample points, always including t = n.
  std::vector<std::size_t> sample_at;
  const std::size_t points = std::max<std::size_t>(1, std::min(opts.stride, n));
  sample_at.reserve(points);
  for (std::size_t i = 1; i <= points; ++i) {
    sample_at.push_back(i * n / points);
  }
  sample_at.erase(std::unique(sample_at.begin(), sample_at.end()), sample_at.end());

  OnlineTrace trace;
  trace.n = n;
  trace.curve.reserve(sample_at.size());

  Learner learner(kind, params, stream.dim, opts.cov_mode);
  std::uint64_t mistakes = 0, updates = 0;
  std::size_t next_sample = 0;

  const auto start = std::chrono::steady_clock::now();
  for (std::size_t t = 1; t <= n; ++t) {
    const Example& ex = stream.examples[t - 1];
    StepOutcome out;
    try {
      out = learner.step(ex, ex.label);
    } catch (const NumericError& e) {
      throw NumericError("step " + std::to_string(t) + ": " + e.what());
    }
    mistakes += out.mistake ? 1 : 0;
    updates += out.updated ? 1 : 0;
    if (next_sample < sample_at.size() && t == sample_at[next_sample]) {
      const double el =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      trace.curve.push_back({t, mistakes, updates, el});
      ++next_sample;
    }
  }
  trace.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  trace.mistakes = mistakes;
  trace.final_mistake_rate = static_cast<double>(mistakes) / static_cast<double>(n);
  trace.update_count = updates;
  trace.cum_alpha2v = learner.diagnostics().cum_alpha2v;
  trace.clamp_events = learner.diagnostics().clamp_events;
  trace.floor_events = learner.diagnostics().floor_events;
  return trace;
}

// --- hyperparameter sweep ----------------------------------------------------

/// The grids of section 5.1: C and r over the nine powers of two, eta over
/// 0.55..0.95 (0.5 is excluded: phi would be 0 and the loss identically 0).
struct ParamGrid {
  std::vector<double> c_values;
  std::vector<double> eta_values;
  std::vector<double> r_values;

  static ParamGrid paper_default() {
    ParamGrid g;
    for (int e = -4; e <= 4; ++e) g.c_values.push_back(std::pow(2.0, e));
    for (int i = 0; i < 9; ++i) g.eta_values.push_back(0.55 + 0.05 * i);
    g.r_values = g.c_values;
    return g;
  }
};

/// Grid points relevant to a kind, in deterministic (c, eta, r) order.
/// Unused axes stay at fixed defaults so every cell carries a full triple.
inline std::vector<HyperParams> grid_points(LearnerKind kind, const ParamGrid& grid) {
  const double c0 = 1.0, eta0 = 0.75, r0 = 1.0;
  const bool uses_c = kind == LearnerKind::PAI || kind == LearnerKind::PAII ||
                      kind == LearnerKind::SCWI || kind == LearnerKind::SCWII;
  const bool uses_eta = kind == LearnerKind::CW || kind == LearnerKind::SCWI ||
                        kind == LearnerKind::SCWII;
  const bool uses_r = kind == LearnerKind::AROW;
  const std::vector<double> cs = uses_c ? grid.c_values : std::vector<double>{c0};
  const std::vector<double> etas = uses_eta ? grid.eta_values : std::vector<double>{eta0};
  const std::vector<double> rs = uses_r ? grid.r_values : std::vector<double>{r0};
  if (cs.empty() || etas.empty() || rs.empty()) throw ConfigError("empty parameter grid");

  std::vector<HyperParams> points;
  points.reserve(cs.size() * etas.size() * rs.size());
  for (double c : cs) {
    for (double eta : etas) {
      for (double r : rs) points.push_back(HyperParams::make(c, eta, r));
    }
  }
  return points;
}

struct SweepCell {
  HyperParams params;
  double mean_rate = 0.0;
  double std_rate = 0.0;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  std::size_t best_index = 0;

  const SweepCell& best() const { return cells.at(best_index); }
};

/// Runs `fn(i)` for i in [0, count) on up to `jobs` threads; results land in
/// index order so the outcome is schedule-independent.
template <typename Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn&& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= count) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  const unsigned n_threads = std::min<unsigned>(jobs, static_cast<unsigned>(count));
  pool.reserve(n_threads);
  for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

/// k-fold cross-validation on a seeded permutation, scored by online mistakes
/// on the held-out fold (the learner first consumes the training portion,
/// then keeps learning through the held-out block while mistakes are
/// counted). Ties break toward the earlier cell in (c, eta, r) order.
inline SweepResult cross_validate(LearnerKind kind, const Dataset& dataset,
                                  const ParamGrid& grid, int folds = 5,
                                  const std::vector<std::uint64_t>& cv_seeds = {1000},
                                  const std::string& cov_mode = "auto",
                                  unsigned jobs = 1) {
  if (folds < 2) throw ConfigError("cross_validate: folds must be >= 2");
  if (dataset.size() < static_cast<std::size_t>(folds)) {
    throw ConfigError("cross_validate: dataset smaller than fold count");
  }
  if (cv_seeds.empty()) throw ConfigError("cross_validate: need at least one seed");
  const std::vector<HyperParams> points = grid_points(kind, grid);

  std::vector<Dataset> permutations;
  permutations.reserve(cv_seeds.size());
  for (std::uint64_t seed : cv_seeds) permutations.push_back(permute(dataset, seed));

  const std::size_t n = dataset.size();
  const CovMode mode = resolve_cov_mode(kind, dataset.dim, cov_mode);

  SweepResult result;
  result.cells.resize(points.size());
  parallel_for(points.size(), jobs, [&](std::size_t pi) {
    const HyperParams& params = points[pi];
    std::vector<double> rates;
    rates.reserve(permutations.size() * static_cast<std::size_t>(folds));
    for (const Dataset& perm : permutations) {
      for (int fold = 0; fold < folds; ++fold) {
        const std::size_t lo = fold * n / folds;
        const std::size_t hi = (fold + 1) * n / folds;
        Learner learner(kind, params, perm.dim, mode);
        for (std::size_t i = 0; i < n; ++i) {
          if (i >= lo && i < hi) continue;
          const Example& ex = perm.examples[i];
          learner.step(ex, ex.label);
        }
        std::uint64_t fold_mistakes = 0;
        for (std::size_t i = lo; i < hi; ++i) {
          const Example& ex = perm.examples[i];
          fold_mistakes += learner.step(ex, ex.label).mistake ? 1 : 0;
        }
        rates.push_back(static_cast<double>(fold_mistakes) /
                        static_cast<double>(hi - lo));
      }
    }
    double mean = 0.0;
    for (double r : rates) mean += r;
    mean /= static_cast<double>(rates.size());
    double var = 0.0;
    for (double r : rates) var += (r - mean) * (r - mean);
    const double stddev =
        rates.size() > 1 ? std::sqrt(var / static_cast<double>(rates.size() - 1)) : 0.0;
    result.cells[pi] = {params, mean, stddev};
  });

  result.best_index = 0;
  for (std::size_t i = 1; i < result.cells.size(); ++i) {
    if (result.cells[i].mean_rate < result.cells[result.best_index].mean_rate) {
      result.best_index = i;
    }
  }
  return result;
}

// --- aggregation -------------------------------------------------------------

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

inline MeanStd mean_std(const std::vector<double>& values) {
  if (values.size() < 2) throw ConfigError("aggregate: need at least 2 values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return {mean, std::sqrt(var / static_cast<double>(values.size() - 1))};
}

struct RunSummary {
  MeanStd mistake_rate;
  MeanStd updates;
  MeanStd seconds;
  MeanStd cum_alpha2v;
};

/// Sample mean and (n-1)-denominator standard deviation per metric.
inline RunSummary aggregate_runs(const std::vector<OnlineTrace>& traces) {
  if (traces.size() < 2) throw ConfigError("aggregate_runs: need at least 2 traces");
  std::vector<double> rate, updates, seconds, a2v;
  for (const OnlineTrace& t : traces) {
    rate.push_back(t.final_mistake_rate);
    updates.push_back(static_cast<double>(t.update_count));
    seconds.push_back(t.elapsed_seconds);
    a2v.push_back(t.cum_alpha2v);
  }
  return {mean_std(rate), mean_std(updates), mean_std(seconds), mean_std(a2v)};
}

// --- paired t-test ------------------------------------------------------------

struct TTestResult {
  bool significant = false;
  double t = 0.0;
  double p = 1.0;
};

/// Two-sided paired Student t-test; pairs are matched by position (the
/// permutation seed). Zero-variance differences short-circuit: nonzero mean
/// is reported significant with p = 0.
inline TTestResult paired_t_test(const std::vector<double>& a,
                                 const std::vector<double>& b, double level = 0.95) {
  if (a.size() != b.size()) throw InputError("paired_t_test: length mismatch");
  if (a.size() < 2) throw InputError("paired_t_test: need at least 2 pairs");
  const std::size_t n = a.size();
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = a[i] - b[i];
  const MeanStd d = mean_std(diff);
  const double alpha = 1.0 - level;
  if (d.std == 0.0) {
    if (d.mean == 0.0) return {false, 0.0, 1.0};
    return {true, d.mean > 0 ? std::numeric_limits<double>::infinity()
                             : -std::numeric_limits<double>::infinity(),
            0.0};
  }
  const double t = d.mean / (d.std / std::sqrt(static_cast<double>(n)));
  const boost::math::students_t dist(static_cast<double>(n - 1));
  const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
  return {p < alpha, t, p};
}

}  // namespace scw
