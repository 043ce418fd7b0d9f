#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace sigconf {

// Scores with anomaly labels (true = anomaly). Scores are extended reals:
// +infinity is a valid score, NaN is an input error everywhere below.
struct ScoredDataset {
  std::vector<double> scores;
  std::vector<bool> labels;
};

// Empirical quantile of ascending values with higher interpolation: the
// attained value at 0-based index ceil(q * (n - 1)); q = 0 gives the
// minimum, q = 1 the maximum.
double empirical_quantile(std::span<const double> sorted_ascending, double q);

// Sorts a copy and applies the 0.5-quantile under the same convention.
double median(std::vector<double> values);

// Probability that a uniformly random anomaly outscores a uniformly
// random normal, ties counting one half (rank / Mann-Whitney form).
// +infinity ranks above every finite score; ties among infinities also
// count one half. Requires both classes present.
double roc_auc(const ScoredDataset& ds);

struct BalancedAccuracy {
  double ba = 0.0;
  double threshold = 0.0;  // predicted anomaly <=> score > threshold
};

// Maximizes (TPR + TNR) / 2 over thresholds at midpoints of adjacent
// distinct scores plus sentinels below and above all scores; the cut
// between the finite scores and an infinite group uses the largest finite
// score, so the threshold is always attainable. BA ties keep the lower
// threshold. Requires both classes present.
BalancedAccuracy best_balanced_accuracy(const ScoredDataset& ds);

// Sorted distinct values with cumulative fractions; mass at +infinity
// appears as the terminal step.
std::vector<std::pair<double, double>> ecdf(std::span<const double> values);

// Standard deviation (population form, so b = 1 gives 0) of the metric
// over b resamples drawn with replacement separately within each class.
// Resample k uses a seed derived from (seed, k), so results do not depend
// on evaluation order and parallel runs agree with serial ones.
double bootstrap_se(const ScoredDataset& ds,
                    const std::function<double(const ScoredDataset&)>& metric, std::size_t b,
                    std::uint64_t seed);

}  // namespace sigconf
