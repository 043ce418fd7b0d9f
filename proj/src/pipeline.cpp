#include "sigconf/pipeline.hpp"

#include <algorithm>

#include "sigconf/errors.hpp"
#include "sigconf/signature.hpp"
#include "sigconf/words.hpp"

namespace sigconf {

std::string_view transform_name(TransformKind k) {
  switch (k) {
    case TransformKind::Time: return "time";
    case TransformKind::TimeDiff: return "time-diff";
    case TransformKind::LeadLag: return "lead-lag";
    case TransformKind::Invisibility: return "invisibility";
  }
  throw ConfigError("unknown transform kind");
}

TransformKind transform_from_name(std::string_view name) {
  if (name == "time") return TransformKind::Time;
  if (name == "time-diff") return TransformKind::TimeDiff;
  if (name == "lead-lag") return TransformKind::LeadLag;
  if (name == "invisibility") return TransformKind::Invisibility;
  throw ConfigError("unknown transform '" + std::string(name) +
                    "' (expected time, time-diff, lead-lag or invisibility)");
}

std::vector<TransformKind> canonical_transform_order(std::vector<TransformKind> transforms) {
  std::sort(transforms.begin(), transforms.end(),
            [](TransformKind a, TransformKind b) { return static_cast<int>(a) < static_cast<int>(b); });
  if (std::adjacent_find(transforms.begin(), transforms.end()) != transforms.end())
    throw ConfigError("duplicate transform in pipeline");
  return transforms;
}

namespace {

Stream apply_transforms(const Stream& s, const PipelineConfig& config) {
  Stream out = s;
  for (TransformKind k : config.transforms) {
    switch (k) {
      case TransformKind::Time: out = time_augment(out, config.time_param); break;
      case TransformKind::TimeDiff: out = time_diff_augment(out); break;
      case TransformKind::LeadLag: out = lead_lag(out); break;
      case TransformKind::Invisibility: out = invisibility(out); break;
    }
  }
  return out;
}

}  // namespace

Stream transform_stream(const Stream& s, const PipelineMeta& meta) {
  Stream out = apply_transforms(s, meta.config);
  return min_max_normalize(
      out, meta.config.normalization == NormalizationMode::Corpus
               ? meta.norm_params
               : NormalizationParams{{}, {}, meta.config.normalization});
}

PipelineMeta plan_pipeline(std::span<const Stream> corpus, const PipelineConfig& config) {
  if (config.order < 1)
    throw ConfigError("signature order must be >= 1: order 0 keeps only the constant coordinate");
  if (corpus.empty()) throw DataError("pipeline: empty corpus");

  PipelineMeta meta;
  meta.config = config;
  meta.config.transforms = canonical_transform_order(config.transforms);
  meta.raw_dim = corpus[0].dim;
  for (const Stream& s : corpus) {
    s.validate();
    if (s.dim != meta.raw_dim) throw DataError("pipeline: mixed stream dimensions in corpus");
  }
  if (config.normalization == NormalizationMode::Corpus) {
    std::vector<Stream> transformed;
    transformed.reserve(corpus.size());
    for (const Stream& s : corpus) transformed.push_back(apply_transforms(s, meta.config));
    meta.norm_params = corpus_minmax_params(transformed);
    meta.transformed_dim = transformed[0].dim;
  } else {
    meta.transformed_dim = apply_transforms(corpus[0], meta.config).dim;
  }
  meta.feature_dim = sig_dim(meta.transformed_dim, config.order);
  return meta;
}

Eigen::MatrixXd featurize(std::span<const Stream> streams, const PipelineMeta& meta) {
  Eigen::MatrixXd features(streams.size(), meta.feature_dim);
  if (streams.empty()) return features;
  std::vector<Stream> transformed;
  transformed.reserve(streams.size());
  for (const Stream& s : streams) {
    if (s.dim != meta.raw_dim)
      throw DataError("stream '" + s.id + "': dimension " + std::to_string(s.dim) +
                      " does not match the pipeline's " + std::to_string(meta.raw_dim));
    transformed.push_back(transform_stream(s, meta));
  }
  const std::vector<double> rows = signature_batch(transformed, meta.config.order);
  for (std::size_t i = 0; i < streams.size(); ++i)
    for (std::size_t j = 0; j < meta.feature_dim; ++j)
      features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i * meta.feature_dim + j];
  return features;
}

FittedPipeline fit_pipeline(std::span<const Stream> corpus, const PipelineConfig& config) {
  FittedPipeline fp;
  fp.meta = plan_pipeline(corpus, config);
  fp.model = fit(featurize(corpus, fp.meta), config.spectral_cutoff, config.null_tolerance);
  return fp;
}

std::vector<Score> score_streams(const FittedPipeline& fp, std::span<const Stream> streams) {
  return conformance_batch(fp.model, featurize(streams, fp.meta));
}

}  // namespace sigconf
