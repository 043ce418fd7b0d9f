#include "sigconf/stream.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "sigconf/errors.hpp"

namespace sigconf {

Stream Stream::of(std::size_t dim, std::initializer_list<double> flat) {
  Stream s;
  s.dim = dim;
  s.data.assign(flat);
  s.validate();
  return s;
}

void Stream::validate() const {
  if (dim == 0) throw DataError("stream '" + id + "': dimension is zero");
  if (data.empty()) throw DataError("stream '" + id + "': no points");
  if (data.size() % dim != 0)
    throw DataError("stream '" + id + "': point data not a multiple of dimension");
  for (double v : data)
    if (!std::isfinite(v)) throw DataError("stream '" + id + "': non-finite coordinate");
  if (!timestamps.empty()) {
    if (timestamps.size() != size())
      throw DataError("stream '" + id + "': timestamp count does not match point count");
    for (std::size_t i = 1; i < timestamps.size(); ++i)
      if (!(timestamps[i] > timestamps[i - 1]))
        throw DataError("stream '" + id + "': timestamps not strictly increasing");
  }
}

namespace {

Stream make_like(const Stream& s, std::size_t dim, std::size_t reserve_points) {
  Stream out;
  out.id = s.id;
  out.label = s.label;
  out.dim = dim;
  out.data.reserve(reserve_points * dim);
  return out;
}

}  // namespace

Stream time_augment(const Stream& s, TimeParam param) {
  s.validate();
  if (param == TimeParam::FromTimestamps && !s.has_timestamps())
    throw DataError("time_augment: stream '" + s.id + "' has no timestamps");
  const std::size_t n = s.size();
  Stream out = make_like(s, s.dim + 1, n);
  for (std::size_t i = 0; i < n; ++i) {
    double t;
    if (param == TimeParam::Uniform)
      t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    else
      t = s.timestamps[i];
    out.data.push_back(t);
    out.append(s.point(i));
  }
  out.timestamps = s.timestamps;
  return out;
}

Stream time_diff_augment(const Stream& s) {
  s.validate();
  if (!s.has_timestamps())
    throw DataError("time_diff_augment: stream '" + s.id + "' has no timestamps");
  const std::size_t n = s.size();
  Stream out = make_like(s, s.dim + 1, n);
  for (std::size_t i = 0; i < n; ++i) {
    out.data.push_back(i == 0 ? 0.0 : s.timestamps[i] - s.timestamps[i - 1]);
    out.append(s.point(i));
  }
  out.timestamps = s.timestamps;
  return out;
}

Stream lead_lag(const Stream& s) {
  s.validate();
  const std::size_t n = s.size();
  Stream out = make_like(s, 2 * s.dim, 2 * n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    out.append(s.point(i));
    out.append(s.point(i));
    if (i + 1 < n) {
      out.append(s.point(i));
      out.append(s.point(i + 1));
    }
  }
  return out;
}

Stream invisibility(const Stream& s) {
  s.validate();
  const std::size_t n = s.size();
  Stream out = make_like(s, s.dim + 1, n + 1);
  out.append(s.point(0));
  out.data.push_back(0.0);
  for (std::size_t i = 0; i < n; ++i) {
    out.append(s.point(i));
    out.data.push_back(1.0);
  }
  return out;
}

NormalizationParams minmax_params(const Stream& s) {
  s.validate();
  NormalizationParams p;
  p.mode = NormalizationMode::PerStream;
  p.min.assign(s.dim, std::numeric_limits<double>::infinity());
  p.max.assign(s.dim, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.dim; ++j) {
      p.min[j] = std::min(p.min[j], s.coord(i, j));
      p.max[j] = std::max(p.max[j], s.coord(i, j));
    }
  return p;
}

NormalizationParams corpus_minmax_params(std::span<const Stream> corpus) {
  if (corpus.empty()) throw DataError("corpus_minmax_params: empty corpus");
  NormalizationParams p = minmax_params(corpus[0]);
  p.mode = NormalizationMode::Corpus;
  for (const Stream& s : corpus.subspan(1)) {
    if (s.dim != p.min.size())
      throw DataError("corpus_minmax_params: mixed stream dimensions");
    NormalizationParams q = minmax_params(s);
    for (std::size_t j = 0; j < p.min.size(); ++j) {
      p.min[j] = std::min(p.min[j], q.min[j]);
      p.max[j] = std::max(p.max[j], q.max[j]);
    }
  }
  return p;
}

Stream min_max_normalize(const Stream& s, const NormalizationParams& params) {
  s.validate();
  NormalizationParams local;
  const NormalizationParams* p = &params;
  if (params.mode == NormalizationMode::PerStream) {
    local = minmax_params(s);
    p = &local;
  } else if (params.mode == NormalizationMode::None) {
    return s;
  }
  if (p->min.size() != s.dim || p->max.size() != s.dim)
    throw DataError("min_max_normalize: params dimension mismatch");
  Stream out = s;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.dim; ++j) {
      const double range = p->max[j] - p->min[j];
      out.data[i * s.dim + j] = range == 0.0 ? 0.0 : (s.coord(i, j) - p->min[j]) / range;
    }
  return out;
}

double haversine_m(double lat1_deg, double lon1_deg, double lat2_deg, double lon2_deg) {
  constexpr double kEarthRadiusM = 6'371'000.0;
  constexpr double kDegToRad = std::numbers::pi / 180.0;
  const double lat1 = lat1_deg * kDegToRad;
  const double lat2 = lat2_deg * kDegToRad;
  const double dlat = (lat2_deg - lat1_deg) * kDegToRad;
  const double dlon = (lon2_deg - lon1_deg) * kDegToRad;
  const double sin_lat = std::sin(dlat / 2.0);
  const double sin_lon = std::sin(dlon / 2.0);
  const double a = sin_lat * sin_lat + std::cos(lat1) * std::cos(lat2) * sin_lon * sin_lon;
  return 2.0 * kEarthRadiusM * std::atan2(std::sqrt(a), std::sqrt(1.0 - a));
}

double point_distance(std::span<const double> a, std::span<const double> b, DistanceKind kind) {
  if (kind == DistanceKind::Haversine) {
    if (a.size() != 2 || b.size() != 2)
      throw DataError("haversine distance requires (latitude, longitude) points");
    return haversine_m(a[0], a[1], b[0], b[1]);
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

Stream compress(const Stream& s, double threshold_m, DistanceKind kind) {
  s.validate();
  if (threshold_m < 0) throw ConfigError("compress: threshold must be >= 0");
  Stream out = make_like(s, s.dim, s.size());
  out.append(s.point(0));
  if (s.has_timestamps()) out.timestamps.push_back(s.timestamps[0]);
  std::size_t last = 0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (point_distance(s.point(last), s.point(i), kind) > threshold_m) {
      out.append(s.point(i));
      if (s.has_timestamps()) out.timestamps.push_back(s.timestamps[i]);
      last = i;
    }
  }
  return out;
}

std::vector<Stream> disintegrate(const Stream& s, double segment_len_m, double max_gap_m,
                                 DistanceKind kind, SegmentMeasure measure) {
  s.validate();
  if (segment_len_m <= 0) throw ConfigError("disintegrate: segment length must be > 0");
  if (max_gap_m <= 0) throw ConfigError("disintegrate: max gap must be > 0");

  std::vector<Stream> out;
  const std::size_t n = s.size();
  std::size_t start = 0;
  double accumulated = 0.0;
  double max_gap_seen = 0.0;
  std::size_t segment_no = 0;

  for (std::size_t i = 1; i < n; ++i) {
    const double step = point_distance(s.point(i - 1), s.point(i), kind);
    max_gap_seen = std::max(max_gap_seen, step);
    if (measure == SegmentMeasure::CumulativePath)
      accumulated += step;
    else
      accumulated = point_distance(s.point(start), s.point(i), kind);
    if (accumulated >= segment_len_m) {
      if (max_gap_seen < max_gap_m) {
        Stream seg = make_like(s, s.dim, i - start + 1);
        seg.id = s.id.empty() ? std::to_string(segment_no) : s.id + "/" + std::to_string(segment_no);
        for (std::size_t k = start; k <= i; ++k) {
          seg.append(s.point(k));
          if (s.has_timestamps()) seg.timestamps.push_back(s.timestamps[k]);
        }
        out.push_back(std::move(seg));
      }
      ++segment_no;
      start = i;
      accumulated = 0.0;
      max_gap_seen = 0.0;
    }
  }
  return out;
}

}  // namespace sigconf
