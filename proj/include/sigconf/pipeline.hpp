#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sigconf/conformance.hpp"
#include "sigconf/stream.hpp"

namespace sigconf {

enum class TransformKind { Time, TimeDiff, LeadLag, Invisibility };

// Names used in configs and persisted models: "time", "time-diff",
// "lead-lag", "invisibility".
std::string_view transform_name(TransformKind k);
TransformKind transform_from_name(std::string_view name);

struct PipelineConfig {
  std::size_t order = 1;  // signature truncation, >= 1
  std::vector<TransformKind> transforms;
  NormalizationMode normalization = NormalizationMode::None;
  TimeParam time_param = TimeParam::Uniform;  // parameterization of the time transform
  double spectral_cutoff = kDefaultSpectralCutoff;
  double null_tolerance = kDefaultNullTolerance;
};

// Everything needed to featurize a stream exactly as at fit time.
struct PipelineMeta {
  PipelineConfig config;            // transforms already in canonical order
  NormalizationParams norm_params;  // per transformed channel when mode is Corpus
  std::size_t raw_dim = 0;
  std::size_t transformed_dim = 0;
  std::size_t feature_dim = 0;  // sig_dim(transformed_dim, order)
};

struct FittedPipeline {
  PipelineMeta meta;
  ConformanceModel model;
  std::optional<Calibration> calibration;
};

// Sorts into the fixed composition order (time, time-diff, lead-lag,
// invisibility) and rejects duplicates. The relative order of time and
// time-diff does not matter for correctness (both consume timestamps and
// keep them), but one order is fixed so persisted models are canonical.
std::vector<TransformKind> canonical_transform_order(std::vector<TransformKind> transforms);

// Transforms first, then min-max normalization of the transformed channels.
// Normalizing last puts appended channels (time differences in particular,
// which arrive in seconds) on the same scale as the coordinates; for the
// time, lead-lag and invisibility transforms the two orders coincide because
// their channel extremes match the raw ones.
Stream transform_stream(const Stream& s, const PipelineMeta& meta);

// Validates the corpus, resolves corpus-wide normalization extremes, and
// computes the dimension bookkeeping. Throws ConfigError for order 0 (the
// features would reduce to the constant coordinate).
PipelineMeta plan_pipeline(std::span<const Stream> corpus, const PipelineConfig& config);

// One signature row per stream, computed with the parallel batch kernel.
Eigen::MatrixXd featurize(std::span<const Stream> streams, const PipelineMeta& meta);

FittedPipeline fit_pipeline(std::span<const Stream> corpus, const PipelineConfig& config);

std::vector<Score> score_streams(const FittedPipeline& fp, std::span<const Stream> streams);

}  // namespace sigconf
