#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace sigconf {

// An ordered sequence of d-dimensional points with optional timestamps.
// Points are stored flat, row-major (point i occupies data[i*dim .. i*dim+dim)).
struct Stream {
  std::string id;
  std::string label;  // empty = unlabeled
  std::size_t dim = 0;
  std::vector<double> data;
  std::vector<double> timestamps;  // empty = absent, else one per point

  std::size_t size() const { return dim == 0 ? 0 : data.size() / dim; }
  bool has_timestamps() const { return !timestamps.empty(); }

  std::span<const double> point(std::size_t i) const {
    return {data.data() + i * dim, dim};
  }
  double coord(std::size_t i, std::size_t j) const { return data[i * dim + j]; }

  void append(std::span<const double> p) { data.insert(data.end(), p.begin(), p.end()); }

  // Convenience builder for literals in tests and tools.
  static Stream of(std::size_t dim, std::initializer_list<double> flat);

  // Checks the structural invariants: at least one point, data size a
  // multiple of dim, timestamps (when present) matching in length and
  // strictly increasing. Throws DataError.
  void validate() const;
};

enum class TimeParam { Uniform, FromTimestamps };
enum class DistanceKind { Euclidean, Haversine };
enum class NormalizationMode { None, PerStream, Corpus };

struct NormalizationParams {
  std::vector<double> min;  // per dimension
  std::vector<double> max;
  NormalizationMode mode = NormalizationMode::None;
};

// --- Stream transformations -------------------------------------------------
//
// Each transform returns a new stream and preserves id and label. The two
// time transforms keep the input's timestamps (the point count is
// unchanged, so they stay valid); lead-lag and invisibility change the
// point count and drop them. Composition order, when several transforms
// are requested, is fixed: time/time-diff first, then lead-lag, then
// invisibility (see pipeline).

// Prepends a time coordinate: point i becomes (t_i, x_i). Uniform mode
// uses t_i = i/(n-1) on [0,1] (t_0 = 0 for a single point); from-timestamps
// mode uses the stream's own timestamps and requires them to be present.
Stream time_augment(const Stream& s, TimeParam param);

// Prepends the difference between successive timestamps: point 0 becomes
// (0, x_0) and point i becomes (t_i - t_{i-1}, x_i). Requires timestamps.
Stream time_diff_augment(const Stream& s);

// Doubles the dimension: for input points x_0..x_{m-1} the output has
// 2m-1 points, with even index 2i -> (x_i, x_i) and odd index 2i+1 ->
// (x_i, x_{i+1}). The first d coordinates lead, the last d lag.
Stream lead_lag(const Stream& s);

// Appends a visibility coordinate: output is (x_0, 0) followed by every
// input point with flag 1, so an m-point stream maps to m+1 points. The
// flagged initial step preserves absolute-position information in the
// signature.
Stream invisibility(const Stream& s);

// Per-dimension extremes of a single stream / of a whole corpus.
NormalizationParams minmax_params(const Stream& s);
NormalizationParams corpus_minmax_params(std::span<const Stream> corpus);

// Affine map of coordinate j to (x - min_j)/(max_j - min_j); a degenerate
// dimension (max_j = min_j) maps to 0. PerStream mode recomputes params
// from s itself and ignores the provided extremes.
Stream min_max_normalize(const Stream& s, const NormalizationParams& params);

// --- Trajectory preprocessing ----------------------------------------------

// Great-circle distance in meters, mean Earth radius 6 371 000 m.
double haversine_m(double lat1_deg, double lon1_deg, double lat2_deg, double lon2_deg);

// Distance between two points; Haversine requires dim 2 with coordinates
// (latitude deg, longitude deg).
double point_distance(std::span<const double> a, std::span<const double> b, DistanceKind kind);

// Keeps the first point, then each point whose distance to the last
// retained point strictly exceeds threshold_m. Timestamps of retained
// points are preserved. Idempotent.
Stream compress(const Stream& s, double threshold_m, DistanceKind kind);

enum class SegmentMeasure { CumulativePath, Displacement };

// Cuts a stream into consecutive sub-streams at existing sample points:
// a sub-stream is emitted each time the accumulated measure (cumulative
// path length by default, straight-line displacement from the cut point
// as the alternative) first reaches segment_len_m, and accumulation
// restarts at the cut point, which is shared between neighbours. The
// trailing remainder is discarded, as is any sub-stream containing a
// successive-point gap >= max_gap_m.
std::vector<Stream> disintegrate(const Stream& s, double segment_len_m, double max_gap_m,
                                 DistanceKind kind,
                                 SegmentMeasure measure = SegmentMeasure::CumulativePath);

}  // namespace sigconf
