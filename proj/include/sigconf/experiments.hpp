#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sigconf/datasets.hpp"
#include "sigconf/metrics.hpp"

namespace sigconf {

struct DigitExperimentResult {
  std::vector<std::size_t> orders;
  std::vector<double> aucs;           // parallel to orders, pooled over digit models
  std::vector<ScoredDataset> pooled;  // the pooled scores behind each AUC
};

// Pen-trajectory protocol: every stream is min-max scaled onto the unit
// square, one model per digit is fit on that digit's training streams (no
// transforms), every test stream is scored under every model with label
// "anomalous iff not that model's digit", and the ten score sets pool
// into a single ranking per signature order. Models score the span
// component only (null tolerance 1), so rankings stay informative when a
// class covariance is rank deficient.
DigitExperimentResult run_digit_experiment(const LabeledCorpus& data,
                                           std::span<const std::size_t> orders);

// One seeded corpus/test split: shuffle normals and anomalies with
// Rng(split), take 80% of the normals (rounded to nearest) plus a
// contamination fraction of that corpus size from the anomalies; the rest
// of both classes is the test set.
struct SeriesSplitPlan {
  std::vector<std::size_t> corpus_idx;  // normals first, then contamination
  std::vector<std::size_t> test_idx;
  std::size_t n_train = 0;        // normal streams in the corpus
  std::size_t contamination = 0;  // anomalous streams in the corpus
};

SeriesSplitPlan plan_series_split(const LabeledCorpus& data, const std::string& normal_class,
                                  double contamination_rate, std::size_t split);

struct SeriesSplit {
  double balanced_accuracy = 0.0;
  double threshold = 0.0;
  std::size_t corpus_normal = 0;
  std::size_t corpus_anomalous = 0;  // contamination
};

struct SeriesExperimentResult {
  std::string normal_class;
  std::vector<SeriesSplit> splits;
  double median_ba = 0.0;
};

// Repeated-split series protocol: per split s (seeded with s), 80% of the
// normal class plus a contamination fraction of that corpus size drawn
// from the anomalies form the corpus; the rest is scored with a
// time-augmented order-N model and the best balanced accuracy over
// thresholds is recorded. Reports the median over splits. Models score
// the span component only (null tolerance 1): an 80% corpus of a small
// class is far from spanning the feature space at useful orders.
SeriesExperimentResult run_series_experiment(const LabeledCorpus& data,
                                             const std::string& normal_class,
                                             double contamination_rate, std::size_t n_splits,
                                             std::size_t order);

}  // namespace sigconf
