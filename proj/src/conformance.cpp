#include "sigconf/conformance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "sigconf/errors.hpp"
#include "sigconf/metrics.hpp"
#include "sigconf/rng.hpp"
#include "sigconf/shuffle.hpp"
#include "sigconf/words.hpp"

namespace sigconf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_dim(const ConformanceModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.feature_dim())
    throw DataError("variance norm: vector length " + std::to_string(x.size()) +
                    " does not match model dimension " + std::to_string(model.feature_dim()));
}

// Shared by the reference and batch paths: norm from the coordinates of w
// in the eigenbasis, given |w|_2. in_span receives the quadratic form
// only when the null components pass the tolerance test.
double norm_from_components(const ConformanceModel& model, const Eigen::VectorXd& comps,
                            double w_norm) {
  const Eigen::Index p = model.feature_dim();
  const double allowed = model.null_tolerance * std::max(1.0, w_norm);
  for (Eigen::Index i = model.rank; i < p; ++i)
    if (std::abs(comps[i]) > allowed) return kInf;
  double q = 0.0;
  for (Eigen::Index i = 0; i < model.rank; ++i) q += comps[i] * comps[i] / model.eigenvalues[i];
  return std::sqrt(q);
}

}  // namespace

ConformanceModel fit(const Eigen::MatrixXd& corpus, double spectral_cutoff,
                     double null_tolerance) {
  const Eigen::Index m = corpus.rows();
  const Eigen::Index p = corpus.cols();
  if (m < 2) throw DataError("fit: corpus needs at least 2 rows, got " + std::to_string(m));
  if (p < 1) throw DataError("fit: empty feature vectors");
  if (!corpus.allFinite()) throw DataError("fit: non-finite corpus entry");
  if (!(spectral_cutoff >= 0.0) || !(null_tolerance >= 0.0))
    throw ConfigError("fit: cutoffs must be nonnegative");

  ConformanceModel model;
  model.spectral_cutoff = spectral_cutoff;
  model.null_tolerance = null_tolerance;
  model.corpus = corpus;
  model.mean = corpus.colwise().mean();
  const Eigen::MatrixXd centered = corpus.rowwise() - model.mean.transpose();
  const Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(m);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) throw DataError("fit: eigendecomposition failed");
  // Solver returns ascending order; store nonincreasing, clamped at zero.
  model.eigenvalues = es.eigenvalues().reverse().cwiseMax(0.0);
  model.eigenvectors = es.eigenvectors().rowwise().reverse();

  const double lambda_max = model.eigenvalues[0];
  model.rank = 0;
  if (lambda_max > 0.0) {
    const double floor = spectral_cutoff * lambda_max;
    while (model.rank < p && model.eigenvalues[model.rank] >= floor &&
           model.eigenvalues[model.rank] > 0.0)
      ++model.rank;
  }
  return model;
}

double variance_norm(const ConformanceModel& model, const Eigen::VectorXd& x) {
  check_dim(model, x);
  if (!x.allFinite()) throw DataError("variance norm: non-finite input");
  const Eigen::VectorXd comps = model.eigenvectors.transpose() * x;
  return norm_from_components(model, comps, x.norm());
}

Score conformance(const ConformanceModel& model, const Eigen::VectorXd& x) {
  check_dim(model, x);
  Score best{kInf, 0, true};
  for (Eigen::Index j = 0; j < model.corpus.rows(); ++j) {
    const double v = variance_norm(model, x - model.corpus.row(j).transpose());
    if (v < best.value) best = {v, static_cast<std::size_t>(j), false};
  }
  if (std::isinf(best.value)) best = {kInf, 0, true};
  return best;
}

std::vector<Score> conformance_batch_serial(const ConformanceModel& model,
                                            const Eigen::MatrixXd& xs) {
  std::vector<Score> out(static_cast<std::size_t>(xs.rows()));
  for (Eigen::Index i = 0; i < xs.rows(); ++i)
    out[static_cast<std::size_t>(i)] = conformance(model, xs.row(i).transpose());
  return out;
}

std::vector<Score> conformance_batch(const ConformanceModel& model, const Eigen::MatrixXd& xs) {
  if (xs.cols() != model.feature_dim() && xs.rows() > 0)
    throw DataError("conformance batch: column count " + std::to_string(xs.cols()) +
                    " does not match model dimension " + std::to_string(model.feature_dim()));
  if (!xs.allFinite()) throw DataError("conformance batch: non-finite input");

  const Eigen::Index p = model.feature_dim();
  const Eigen::Index rank = model.rank;
  const Eigen::Index m = model.corpus.rows();

  // Corpus rows projected onto the eigenbasis once; per test vector the
  // difference of projections replaces the per-pair projection, which is
  // the whole saving.
  const Eigen::MatrixXd corpus_proj = model.corpus * model.eigenvectors;  // m x p
  const Eigen::VectorXd inv_lambda =
      model.eigenvalues.head(rank).cwiseInverse();

  std::vector<Score> out(static_cast<std::size_t>(xs.rows()));
  const std::int64_t n = static_cast<std::int64_t>(xs.rows());
#pragma omp parallel
  {
    Eigen::VectorXd x_proj(p), diff(p);
#pragma omp for schedule(dynamic, 8)
    for (std::int64_t i = 0; i < n; ++i) {
      x_proj.noalias() = model.eigenvectors.transpose() * xs.row(i).transpose();
      Score best{kInf, 0, true};
      for (Eigen::Index j = 0; j < m; ++j) {
        diff = x_proj - corpus_proj.row(j).transpose();
        // The eigenbasis is orthonormal, so |diff| equals |x - y|.
        const double w_norm = diff.norm();
        const double allowed = model.null_tolerance * std::max(1.0, w_norm);
        if (rank < p && diff.tail(p - rank).cwiseAbs().maxCoeff() > allowed) continue;
        const double q = diff.head(rank).cwiseAbs2().dot(inv_lambda);
        const double v = std::sqrt(q);
        if (v < best.value) best = {v, static_cast<std::size_t>(j), false};
      }
      out[static_cast<std::size_t>(i)] = best;
    }
  }
  return out;
}

Eigen::MatrixXd second_moment_via_shuffle(const Eigen::VectorXd& expected_sig_2n, std::size_t d,
                                          std::size_t n) {
  const std::size_t width = sig_dim(d, n);
  if (static_cast<std::size_t>(expected_sig_2n.size()) != sig_dim(d, 2 * n))
    throw ConfigError("second_moment_via_shuffle: expected an order-2N signature average");
  const ShuffleTable table(d, n);
  Eigen::MatrixXd a(width, width);
  for (std::size_t i = 0; i < width; ++i)
    for (std::size_t j = i; j < width; ++j) {
      double sum = 0.0;
      for (const auto& [idx, coeff] : table.expansion(i, j))
        sum += coeff * expected_sig_2n[static_cast<Eigen::Index>(idx)];
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sum;
      a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = sum;
    }
  return a;
}

Calibration calibrate(const Eigen::MatrixXd& corpus, double epsilon, std::uint64_t seed,
                      double spectral_cutoff, double null_tolerance) {
  const Eigen::Index m = corpus.rows();
  if (m < 4) throw DataError("calibrate: corpus needs at least 4 rows, got " + std::to_string(m));
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ConfigError("calibrate: epsilon outside (0,1]");

  std::vector<Eigen::Index> perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  rng.shuffle(perm);

  // The fitted half takes the extra row when m is odd.
  const Eigen::Index n1 = (m + 1) / 2;
  Eigen::MatrixXd d1(n1, corpus.cols()), d2(m - n1, corpus.cols());
  for (Eigen::Index i = 0; i < n1; ++i) d1.row(i) = corpus.row(perm[static_cast<std::size_t>(i)]);
  for (Eigen::Index i = n1; i < m; ++i)
    d2.row(i - n1) = corpus.row(perm[static_cast<std::size_t>(i)]);

  const ConformanceModel half_model = fit(d1, spectral_cutoff, null_tolerance);
  const std::vector<Score> scored = conformance_batch(half_model, d2);

  Calibration cal;
  cal.epsilon = epsilon;
  cal.seed = seed;
  cal.holdout_scores.reserve(scored.size());
  for (const Score& s : scored) cal.holdout_scores.push_back(s.value);
  std::sort(cal.holdout_scores.begin(), cal.holdout_scores.end());
  cal.median_r = empirical_quantile(cal.holdout_scores, 0.5);
  cal.threshold = empirical_quantile(cal.holdout_scores, 1.0 - epsilon);
  return cal;
}

Detection detect(const ConformanceModel& model, const Calibration& calibration,
                 const Eigen::VectorXd& x) {
  Detection det;
  det.score = conformance(model, x);
  det.is_anomaly = det.score.value > calibration.threshold || std::isinf(det.score.value);
  return det;
}

}  // namespace sigconf
