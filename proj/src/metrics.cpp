#include "sigconf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "sigconf/errors.hpp"
#include "sigconf/rng.hpp"

namespace sigconf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_scores(const ScoredDataset& ds, bool need_both_classes) {
  if (ds.scores.size() != ds.labels.size())
    throw DataError("scored dataset: score/label length mismatch");
  if (ds.scores.empty()) throw DataError("scored dataset: empty");
  for (double s : ds.scores)
    if (std::isnan(s)) throw DataError("scored dataset: NaN score");
  if (need_both_classes) {
    const std::size_t anomalies =
        static_cast<std::size_t>(std::count(ds.labels.begin(), ds.labels.end(), true));
    if (anomalies == 0 || anomalies == ds.labels.size())
      throw DataError("scored dataset: both classes required");
  }
}

}  // namespace

double empirical_quantile(std::span<const double> sorted_ascending, double q) {
  if (sorted_ascending.empty()) throw DataError("empirical_quantile: empty input");
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("empirical_quantile: q outside [0,1]");
  const std::size_t n = sorted_ascending.size();
  const double pos = std::ceil(q * static_cast<double>(n - 1));
  std::size_t idx = static_cast<std::size_t>(pos);
  if (idx >= n) idx = n - 1;
  return sorted_ascending[idx];
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return empirical_quantile(values, 0.5);
}

double roc_auc(const ScoredDataset& ds) {
  check_scores(ds, true);
  const std::size_t n = ds.scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return ds.scores[a] < ds.scores[b]; });

  // Midrank sum over anomalies, walking tie groups.
  double rank_sum = 0.0;
  std::size_t n_anom = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && ds.scores[order[j]] == ds.scores[order[i]]) ++j;
    const double midrank = static_cast<double>(i + j + 1) / 2.0;  // mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k)
      if (ds.labels[order[k]]) {
        rank_sum += midrank;
        ++n_anom;
      }
    i = j;
  }
  const std::size_t n_norm = n - n_anom;
  const double u = rank_sum - static_cast<double>(n_anom) * (static_cast<double>(n_anom) + 1.0) / 2.0;
  return u / (static_cast<double>(n_anom) * static_cast<double>(n_norm));
}

BalancedAccuracy best_balanced_accuracy(const ScoredDataset& ds) {
  check_scores(ds, true);
  const std::size_t n = ds.scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return ds.scores[a] < ds.scores[b]; });

  const double n_anom = static_cast<double>(std::count(ds.labels.begin(), ds.labels.end(), true));
  const double n_norm = static_cast<double>(n) - n_anom;

  // Walking cuts from below all scores upward; predicted anomaly <=> score
  // strictly above the threshold.
  BalancedAccuracy best{0.5, -kInf};  // everything anomalous
  double tn = 0.0, fn = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && ds.scores[order[j]] == ds.scores[order[i]]) ++j;
    for (std::size_t k = i; k < j; ++k)
      ds.labels[order[k]] ? ++fn : ++tn;
    const double v = ds.scores[order[i]];
    double threshold;
    if (j == n)
      threshold = std::isinf(v) ? kInf : v;  // nothing above: all normal
    else {
      const double next = ds.scores[order[j]];
      threshold = std::isinf(next) ? v : (v + next) / 2.0;
    }
    const double ba = ((n_anom - fn) / n_anom + tn / n_norm) / 2.0;
    if (ba > best.ba) best = {ba, threshold};
    i = j;
  }
  return best;
}

std::vector<std::pair<double, double>> ecdf(std::span<const double> values) {
  if (values.empty()) throw DataError("ecdf: empty input");
  std::vector<double> sorted(values.begin(), values.end());
  for (double v : sorted)
    if (std::isnan(v)) throw DataError("ecdf: NaN value");
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<double, double>> steps;
  const double n = static_cast<double>(sorted.size());
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    steps.emplace_back(sorted[i], static_cast<double>(j) / n);
    i = j;
  }
  return steps;
}

double bootstrap_se(const ScoredDataset& ds,
                    const std::function<double(const ScoredDataset&)>& metric, std::size_t b,
                    std::uint64_t seed) {
  check_scores(ds, false);
  if (b < 1) throw ConfigError("bootstrap_se: need at least one resample");
  std::vector<std::size_t> anom_idx, norm_idx;
  for (std::size_t i = 0; i < ds.labels.size(); ++i)
    (ds.labels[i] ? anom_idx : norm_idx).push_back(i);

  std::vector<double> stats(b);
  const std::int64_t bb = static_cast<std::int64_t>(b);
#pragma omp parallel
  {
    ScoredDataset resample;
    resample.scores.resize(ds.scores.size());
    resample.labels.resize(ds.labels.size());
#pragma omp for schedule(dynamic, 8)
    for (std::int64_t k = 0; k < bb; ++k) {
      Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(k)));
      std::size_t pos = 0;
      for (std::size_t draw = 0; draw < anom_idx.size(); ++draw, ++pos) {
        const std::size_t src = anom_idx[rng.below(anom_idx.size())];
        resample.scores[pos] = ds.scores[src];
        resample.labels[pos] = true;
      }
      for (std::size_t draw = 0; draw < norm_idx.size(); ++draw, ++pos) {
        const std::size_t src = norm_idx[rng.below(norm_idx.size())];
        resample.scores[pos] = ds.scores[src];
        resample.labels[pos] = false;
      }
      // Exceptions must not unwind out of the parallel region.
      try {
        stats[static_cast<std::size_t>(k)] = metric(resample);
      } catch (...) {
        stats[static_cast<std::size_t>(k)] = std::numeric_limits<double>::quiet_NaN();
      }
    }
  }
  for (double s : stats)
    if (std::isnan(s)) throw DataError("bootstrap_se: metric failed on a resample");

  const double mean = std::accumulate(stats.begin(), stats.end(), 0.0) / static_cast<double>(b);
  double ss = 0.0;
  for (double s : stats) ss += (s - mean) * (s - mean);
  return std::sqrt(ss / static_cast<double>(b));
}

}  // namespace sigconf
