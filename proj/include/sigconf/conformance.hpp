#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace sigconf {

inline constexpr double kDefaultSpectralCutoff = 1e-10;
inline constexpr double kDefaultNullTolerance = 1e-8;

// Fitted corpus model for the variance norm: the dual norm of the
// mean-centered covariance quadratic form, evaluated as a Mahalanobis norm
// with spectral pseudo-inversion. Eigenvalues below spectral_cutoff times
// the largest count as exact zeros; their eigenvectors span the null
// directions, and a vector with a component beyond null_tolerance along
// any of them has infinite norm. Immutable after fit.
struct ConformanceModel {
  Eigen::VectorXd mean;
  Eigen::VectorXd eigenvalues;   // nonincreasing, clamped at zero
  Eigen::MatrixXd eigenvectors;  // orthonormal columns matching eigenvalues
  Eigen::MatrixXd corpus;        // one feature vector per row
  Eigen::Index rank = 0;         // leading eigenvalues treated as positive
  double spectral_cutoff = kDefaultSpectralCutoff;
  double null_tolerance = kDefaultNullTolerance;

  Eigen::Index feature_dim() const { return mean.size(); }
};

struct Score {
  double value = 0.0;             // +infinity when no corpus member is reachable in span
  std::size_t nearest_index = 0;  // first minimizing corpus row; 0 when out_of_span
  bool out_of_span = false;       // exactly when value is +infinity
};

// Covariance is the population (1/m) form, centered at the corpus mean.
// Requires m >= 2 rows and finite entries.
ConformanceModel fit(const Eigen::MatrixXd& corpus,
                     double spectral_cutoff = kDefaultSpectralCutoff,
                     double null_tolerance = kDefaultNullTolerance);

// Norm of x under the model. Components along null directions larger than
// null_tolerance * max(1, |x|_2) make the result +infinity; smaller ones
// are attributed to roundoff and dropped. Otherwise returns
// sqrt(sum c_i^2 / lambda_i) over the retained spectrum.
double variance_norm(const ConformanceModel& model, const Eigen::VectorXd& x);

// Minimum of variance_norm(x - y) over corpus rows y, with the argmin.
// Serial reference; the batch kernel below is the optimized path.
Score conformance(const ConformanceModel& model, const Eigen::VectorXd& x);

// One score per row of xs. Caches the corpus projections onto the
// eigenbasis once and parallelizes over rows with OpenMP; each row's
// result lands in its own slot, so output does not depend on the thread
// count. The serial variant runs conformance row by row and is kept as
// the reference implementation.
std::vector<Score> conformance_batch(const ConformanceModel& model, const Eigen::MatrixXd& xs);
std::vector<Score> conformance_batch_serial(const ConformanceModel& model,
                                            const Eigen::MatrixXd& xs);

// Uncentered second-moment matrix built through the shuffle identity:
// entry (i, j) is <w_i shuffle w_j, t> where w_i runs over the words of
// length <= n and t is the corpus average of order-2n signatures. Equals
// the mean of s s^T over the order-n corpus signatures, so the centered
// covariance is this matrix minus mean mean^T (cross-check against fit).
Eigen::MatrixXd second_moment_via_shuffle(const Eigen::VectorXd& expected_sig_2n, std::size_t d,
                                          std::size_t n);

// Split-half calibration: rows are shuffled with the seed, the first half
// (taking the extra row when the count is odd) is fitted, the held-out
// half is scored against it, and the threshold is the empirical
// (1 - epsilon)-quantile of those scores. median_r is their median, the
// scale at which half the held-out corpus would be flagged.
struct Calibration {
  double median_r = 0.0;
  double threshold = 0.0;
  std::vector<double> holdout_scores;  // ascending, +infinity last
  double epsilon = 0.0;
  std::uint64_t seed = 0;
};

Calibration calibrate(const Eigen::MatrixXd& corpus, double epsilon, std::uint64_t seed,
                      double spectral_cutoff = kDefaultSpectralCutoff,
                      double null_tolerance = kDefaultNullTolerance);

struct Detection {
  Score score;
  bool is_anomaly = false;
};

// Anomalous exactly when the score exceeds the calibrated threshold;
// infinite scores are anomalous regardless of the threshold.
Detection detect(const ConformanceModel& model, const Calibration& calibration,
                 const Eigen::VectorXd& x);

}  // namespace sigconf
