#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "oracles.hpp"
#include "sigconf/errors.hpp"
#include "sigconf/metrics.hpp"
#include "sigconf/rng.hpp"
#include "test_support.hpp"

using namespace sigconf;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ScoredDataset make(std::vector<double> normal, std::vector<double> anomaly) {
  ScoredDataset ds;
  for (double v : normal) {
    ds.scores.push_back(v);
    ds.labels.push_back(false);
  }
  for (double v : anomaly) {
    ds.scores.push_back(v);
    ds.labels.push_back(true);
  }
  return ds;
}

ScoredDataset random_dataset(Rng& rng, std::size_t max_points) {
  ScoredDataset ds;
  const std::size_t n = 2 + rng.below(max_points - 1);
  std::size_t n_anom = 1 + rng.below(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    double v;
    const double roll = rng.next_double();
    if (roll < 0.1)
      v = kInf;
    else if (roll < 0.3)
      v = static_cast<double>(rng.below(4));  // force ties
    else
      v = rng.normal();
    ds.scores.push_back(v);
    ds.labels.push_back(i < n_anom);
  }
  return ds;
}

}  // namespace

TEST_CASE("auc on pinned examples") {
  CHECK(roc_auc(make({0, 1}, {2, 3})) == 1.0);
  CHECK(roc_auc(make({1, 2}, {1, 2})) == 0.5);
  CHECK(roc_auc(make({1, 3}, {2, 4})) == 0.75);
  CHECK(roc_auc(make({2, 3}, {0, 1})) == 0.0);
  CHECK(roc_auc(make({1}, {1})) == 0.5);
  CHECK(roc_auc(make({0, kInf}, {kInf})) == 0.75);  // infinite tie counts half
}

TEST_CASE("auc input validation") {
  CHECK_THROWS_AS(roc_auc(make({1, 2}, {})), DataError);
  CHECK_THROWS_AS(roc_auc(make({}, {1})), DataError);
  ScoredDataset nan_ds = make({1}, {2});
  nan_ds.scores[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(roc_auc(nan_ds), DataError);
  ScoredDataset ragged;
  ragged.scores = {1, 2};
  ragged.labels = {true};
  CHECK_THROWS_AS(roc_auc(ragged), DataError);
}

TEST_CASE("auc equals pair counting everywhere") {
  Rng rng(201);
  for (int rep = 0; rep < 200; ++rep) {
    ScoredDataset ds = random_dataset(rng, 200);
    CHECK(roc_auc(ds) == oracles::auc_pairs(ds));
  }
}

TEST_CASE("auc survives monotone transforms and flips under complement") {
  Rng rng(202);
  for (int rep = 0; rep < 50; ++rep) {
    ScoredDataset ds = random_dataset(rng, 60);
    for (double& v : ds.scores) v = std::abs(v);  // nonnegative, ties preserved
    const double base = roc_auc(ds);

    ScoredDataset squared = ds;
    for (double& v : squared.scores) v = v * v;
    CHECK(roc_auc(squared) == base);

    ScoredDataset shifted = ds;
    for (double& v : shifted.scores) v = 3.0 * v + 7.0;
    CHECK(roc_auc(shifted) == base);

    ScoredDataset flipped = ds;
    flipped.labels.flip();
    CHECK(roc_auc(flipped) == doctest::Approx(1.0 - base).epsilon(1e-15));
  }
}

TEST_CASE("balanced accuracy on pinned examples") {
  BalancedAccuracy sep = best_balanced_accuracy(make({1, 2}, {3}));
  CHECK(sep.ba == 1.0);
  CHECK(sep.threshold >= 2.0);
  CHECK(sep.threshold < 3.0);

  CHECK(best_balanced_accuracy(make({1, 3}, {2, 4})).ba == 0.75);
  CHECK(best_balanced_accuracy(make({5, 5}, {5, 5})).ba == 0.5);
}

TEST_CASE("balanced accuracy conventions") {
  Rng rng(203);
  for (int rep = 0; rep < 100; ++rep) {
    ScoredDataset ds = random_dataset(rng, 60);
    BalancedAccuracy best = best_balanced_accuracy(ds);
    CHECK(best.ba >= 0.5);
    CHECK(best.ba <= 1.0);
    CHECK(!std::isnan(best.threshold));

    // the reported threshold reproduces the reported value
    std::size_t tp = 0, tn = 0, pos = 0, neg = 0;
    for (std::size_t i = 0; i < ds.scores.size(); ++i) {
      const bool flagged = ds.scores[i] > best.threshold;
      if (ds.labels[i]) {
        ++pos;
        tp += flagged;
      } else {
        ++neg;
        tn += flagged ? 0 : 1;
      }
    }
    const double ba = 0.5 * (static_cast<double>(tp) / pos + static_cast<double>(tn) / neg);
    CHECK(testsup::close(ba, best.ba, 1e-12));

    // separable datasets and only they reach 1.0
    double max_normal = -kInf, min_anomaly = kInf;
    for (std::size_t i = 0; i < ds.scores.size(); ++i) {
      if (ds.labels[i]) min_anomaly = std::min(min_anomaly, ds.scores[i]);
      else max_normal = std::max(max_normal, ds.scores[i]);
    }
    CHECK((best.ba == 1.0) == (max_normal < min_anomaly));
  }
}

TEST_CASE("balanced accuracy tie breaks toward the lower threshold") {
  // thresholds in [1,2) and [2,3) both give ba 0.75; the lower wins
  BalancedAccuracy ba = best_balanced_accuracy(make({1, 2}, {2, 3}));
  CHECK(ba.ba == 0.75);
  CHECK(ba.threshold < 2.0);
  CHECK(ba.threshold >= 1.0);
}

TEST_CASE("balanced accuracy with infinite scores") {
  // the cut before the infinite group sits at the largest finite score
  BalancedAccuracy ba = best_balanced_accuracy(make({1, 2}, {kInf, kInf}));
  CHECK(ba.ba == 1.0);
  CHECK(ba.threshold == 2.0);

  // all scores infinite: no threshold separates anything
  CHECK(best_balanced_accuracy(make({kInf}, {kInf})).ba == 0.5);
  CHECK_THROWS_AS(best_balanced_accuracy(make({1}, {})), DataError);
}

TEST_CASE("quantile and median conventions") {
  const std::vector<double> v{1, 2, 3, 4};
  CHECK(empirical_quantile(v, 0.0) == 1.0);
  CHECK(empirical_quantile(v, 1.0) == 4.0);
  CHECK(empirical_quantile(v, 0.5) == 3.0);  // higher interpolation
  CHECK(empirical_quantile(v, 0.34) == 3.0); // ceil(0.34 * 3) = 2
  CHECK(empirical_quantile(std::vector<double>{7}, 0.5) == 7.0);

  CHECK(median({3, 1, 2}) == 2.0);
  CHECK(median({4, 1, 3, 2}) == 3.0);
  CHECK(median({kInf, 0}) == kInf);
  CHECK_THROWS_AS(median({}), DataError);
  CHECK_THROWS_AS(empirical_quantile(v, 1.5), ConfigError);
}

TEST_CASE("ecdf steps") {
  using Steps = std::vector<std::pair<double, double>>;
  CHECK(ecdf(std::vector<double>{1, 1, 2}) == Steps{{1, 2.0 / 3.0}, {2, 1.0}});
  CHECK(ecdf(std::vector<double>{5}) == Steps{{5, 1.0}});
  CHECK(ecdf(std::vector<double>{0, kInf}) == Steps{{0, 0.5}, {kInf, 1.0}});
  CHECK_THROWS_AS(ecdf(std::vector<double>{}), DataError);

  Rng rng(204);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> values;
    const std::size_t n = 1 + rng.below(40);
    for (std::size_t i = 0; i < n; ++i)
      values.push_back(static_cast<double>(rng.below(10)));
    auto steps = ecdf(values);
    CHECK(std::is_sorted(steps.begin(), steps.end()));
    CHECK(steps.back().second == 1.0);
    double count = 0;
    for (auto& [value, frac] : steps) {
      count += std::count(values.begin(), values.end(), value);
      CHECK(testsup::close(frac, count / static_cast<double>(n), 1e-15));
    }
  }
}

TEST_CASE("bootstrap standard error") {
  ScoredDataset ds = make({0, 1, 2, 3}, {2.5, 3.5, 4, 5});
  CHECK(bootstrap_se(ds, roc_auc, 1, 42) == 0.0);
  const auto constant = [](const ScoredDataset&) { return 0.25; };
  CHECK(bootstrap_se(ds, constant, 50, 42) == 0.0);

  // deterministic given the seed
  const double a = bootstrap_se(ds, roc_auc, 200, 7);
  const double b = bootstrap_se(ds, roc_auc, 200, 7);
  CHECK(a == b);
  CHECK(a > 0.0);
  CHECK(bootstrap_se(ds, roc_auc, 200, 8) != a);

  // resampling preserves perfect separation
  ScoredDataset sep = make({0, 1, 2}, {5, 6, 7});
  CHECK(bootstrap_se(sep, roc_auc, 200, 7) == 0.0);

  // class sizes are preserved within every resample
  const auto size_probe = [&](const ScoredDataset& sample) {
    std::size_t anom = 0;
    for (bool l : sample.labels) anom += l;
    CHECK(anom == 4);
    CHECK(sample.scores.size() == 8);
    return roc_auc(sample);
  };
  bootstrap_se(ds, size_probe, 25, 11);
}
