#include "sigconf/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "sigconf/errors.hpp"

namespace sigconf {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last || std::isnan(v))
    throw DataError("not a number: '" + std::string(text) + "'");
  return v;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open '" + path + "' for writing");
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open '" + path + "'");
  return is;
}

// JSON has no infinities; fields that may hold one are stored as strings.
json extended_to_json(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double extended_from_json(const json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_double(j.get<std::string>());
  throw DataError(what + ": expected a number or \"inf\"");
}

const json& field(const json& j, const char* name, const std::string& what) {
  const auto it = j.find(name);
  if (it == j.end()) throw DataError(what + ": missing field '" + name + "'");
  return *it;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw DataError(what + ": expected an array of rows");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  Eigen::MatrixXd m;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array()) throw DataError(what + ": expected an array of rows");
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      m.resize(rows, cols);
    }
    if (static_cast<Eigen::Index>(row.size()) != cols)
      throw DataError(what + ": ragged rows");
    for (Eigen::Index k = 0; k < cols; ++k)
      m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  if (rows == 0) m.resize(0, 0);
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw DataError(what + ": expected an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

}  // namespace

void write_streams(std::ostream& os, std::span<const Stream> streams) {
  for (const Stream& s : streams) {
    s.validate();
    json j;
    j["id"] = s.id;
    if (!s.label.empty()) j["label"] = s.label;
    if (s.has_timestamps()) j["timestamps"] = s.timestamps;
    json points = json::array();
    for (std::size_t i = 0; i < s.size(); ++i) {
      json pt = json::array();
      for (std::size_t k = 0; k < s.dim; ++k) pt.push_back(s.coord(i, k));
      points.push_back(std::move(pt));
    }
    j["points"] = std::move(points);
    os << j.dump() << '\n';
  }
}

void write_streams_file(const std::string& path, std::span<const Stream> streams) {
  auto os = open_out(path);
  write_streams(os, streams);
}

std::vector<Stream> read_streams(std::istream& is, const std::string& origin) {
  std::vector<Stream> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(where + ": " + e.what());
    }
    if (!j.is_object()) throw DataError(where + ": expected a JSON object");
    Stream s;
    const json& id = field(j, "id", where);
    if (!id.is_string()) throw DataError(where + ": id must be a string");
    s.id = id.get<std::string>();
    if (j.contains("label")) s.label = j["label"].get<std::string>();
    if (j.contains("timestamps")) s.timestamps = j["timestamps"].get<std::vector<double>>();
    const json& points = field(j, "points", where);
    if (!points.is_array() || points.empty())
      throw DataError(where + ": points must be a nonempty array");
    for (const json& pt : points) {
      if (!pt.is_array()) throw DataError(where + ": each point must be an array");
      if (s.dim == 0) s.dim = pt.size();
      if (pt.size() != s.dim) throw DataError(where + ": points of mixed dimension");
      for (const json& c : pt) {
        if (!c.is_number()) throw DataError(where + ": coordinates must be numbers");
        s.data.push_back(c.get<double>());
      }
    }
    try {
      s.validate();
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Stream> read_streams_file(const std::string& path) {
  auto is = open_in(path);
  return read_streams(is, path);
}

void save_model(const std::string& path, const FittedPipeline& fp) {
  json pipeline;
  pipeline["order"] = fp.meta.config.order;
  json transforms = json::array();
  for (TransformKind k : fp.meta.config.transforms) transforms.push_back(transform_name(k));
  pipeline["transforms"] = std::move(transforms);
  switch (fp.meta.config.normalization) {
    case NormalizationMode::None: pipeline["normalization"] = "none"; break;
    case NormalizationMode::PerStream: pipeline["normalization"] = "per-stream"; break;
    case NormalizationMode::Corpus: pipeline["normalization"] = "corpus"; break;
  }
  pipeline["time_param"] =
      fp.meta.config.time_param == TimeParam::Uniform ? "uniform" : "from-timestamps";
  pipeline["spectral_cutoff"] = fp.meta.config.spectral_cutoff;
  pipeline["null_tolerance"] = fp.meta.config.null_tolerance;
  if (fp.meta.config.normalization == NormalizationMode::Corpus) {
    pipeline["norm_min"] = fp.meta.norm_params.min;
    pipeline["norm_max"] = fp.meta.norm_params.max;
  }
  pipeline["raw_dim"] = fp.meta.raw_dim;
  pipeline["transformed_dim"] = fp.meta.transformed_dim;
  pipeline["feature_dim"] = fp.meta.feature_dim;

  json j;
  j["format"] = "sigconf-model";
  j["version"] = 1;
  j["pipeline"] = std::move(pipeline);
  j["mean"] = vector_to_json(fp.model.mean);
  j["eigenvalues"] = vector_to_json(fp.model.eigenvalues);
  j["eigenvectors"] = matrix_to_json(fp.model.eigenvectors);
  j["corpus"] = matrix_to_json(fp.model.corpus);
  j["rank"] = fp.model.rank;

  if (fp.calibration) {
    json cal;
    cal["epsilon"] = fp.calibration->epsilon;
    cal["seed"] = fp.calibration->seed;
    cal["median_r"] = extended_to_json(fp.calibration->median_r);
    cal["threshold"] = extended_to_json(fp.calibration->threshold);
    json scores = json::array();
    for (double s : fp.calibration->holdout_scores) scores.push_back(extended_to_json(s));
    cal["holdout_scores"] = std::move(scores);
    j["calibration"] = std::move(cal);
  }

  auto os = open_out(path);
  os << j.dump(1) << '\n';
}

FittedPipeline load_model(const std::string& path) {
  auto is = open_in(path);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  const std::string what = path;
  if (field(j, "format", what) != "sigconf-model" || field(j, "version", what) != 1)
    throw DataError(path + ": not a model file of a supported version");

  FittedPipeline fp;
  const json& pipeline = field(j, "pipeline", what);
  fp.meta.config.order = field(pipeline, "order", what).get<std::size_t>();
  for (const json& t : field(pipeline, "transforms", what))
    fp.meta.config.transforms.push_back(transform_from_name(t.get<std::string>()));
  const std::string norm = field(pipeline, "normalization", what).get<std::string>();
  if (norm == "none")
    fp.meta.config.normalization = NormalizationMode::None;
  else if (norm == "per-stream")
    fp.meta.config.normalization = NormalizationMode::PerStream;
  else if (norm == "corpus")
    fp.meta.config.normalization = NormalizationMode::Corpus;
  else
    throw DataError(path + ": unknown normalization '" + norm + "'");
  const std::string tp = field(pipeline, "time_param", what).get<std::string>();
  if (tp == "uniform")
    fp.meta.config.time_param = TimeParam::Uniform;
  else if (tp == "from-timestamps")
    fp.meta.config.time_param = TimeParam::FromTimestamps;
  else
    throw DataError(path + ": unknown time_param '" + tp + "'");
  fp.meta.config.spectral_cutoff = field(pipeline, "spectral_cutoff", what).get<double>();
  fp.meta.config.null_tolerance = field(pipeline, "null_tolerance", what).get<double>();
  if (fp.meta.config.normalization == NormalizationMode::Corpus) {
    fp.meta.norm_params.min = field(pipeline, "norm_min", what).get<std::vector<double>>();
    fp.meta.norm_params.max = field(pipeline, "norm_max", what).get<std::vector<double>>();
    fp.meta.norm_params.mode = NormalizationMode::Corpus;
  }
  fp.meta.raw_dim = field(pipeline, "raw_dim", what).get<std::size_t>();
  fp.meta.transformed_dim = field(pipeline, "transformed_dim", what).get<std::size_t>();
  fp.meta.feature_dim = field(pipeline, "feature_dim", what).get<std::size_t>();

  fp.model.mean = vector_from_json(field(j, "mean", what), what + ": mean");
  fp.model.eigenvalues = vector_from_json(field(j, "eigenvalues", what), what + ": eigenvalues");
  fp.model.eigenvectors =
      matrix_from_json(field(j, "eigenvectors", what), what + ": eigenvectors");
  fp.model.corpus = matrix_from_json(field(j, "corpus", what), what + ": corpus");
  fp.model.rank = field(j, "rank", what).get<Eigen::Index>();
  fp.model.spectral_cutoff = fp.meta.config.spectral_cutoff;
  fp.model.null_tolerance = fp.meta.config.null_tolerance;

  if (j.contains("calibration")) {
    const json& cal = j["calibration"];
    Calibration c;
    c.epsilon = field(cal, "epsilon", what).get<double>();
    c.seed = field(cal, "seed", what).get<std::uint64_t>();
    c.median_r = extended_from_json(field(cal, "median_r", what), what + ": median_r");
    c.threshold = extended_from_json(field(cal, "threshold", what), what + ": threshold");
    for (const json& s : field(cal, "holdout_scores", what))
      c.holdout_scores.push_back(extended_from_json(s, what + ": holdout_scores"));
    fp.calibration = std::move(c);
  }

  const Eigen::Index p = fp.model.mean.size();
  if (fp.model.eigenvalues.size() != p || fp.model.eigenvectors.rows() != p ||
      fp.model.eigenvectors.cols() != p ||
      (fp.model.corpus.rows() > 0 && fp.model.corpus.cols() != p) ||
      fp.model.rank < 0 || fp.model.rank > p ||
      static_cast<std::size_t>(p) != fp.meta.feature_dim)
    throw DataError(path + ": inconsistent model dimensions");
  return fp;
}

namespace {

void check_csv_field(const std::string& v, const char* what) {
  if (v.find_first_of(",\r\n") != std::string::npos)
    throw DataError(std::string(what) + " must not contain commas or line breaks: '" + v + "'");
}

}  // namespace

void write_scores(const std::string& path, std::span<const ScoreRow> rows) {
  auto os = open_out(path);
  os << "id,score,label\n";
  for (const ScoreRow& r : rows) {
    check_csv_field(r.id, "score row id");
    check_csv_field(r.label, "score row label");
    os << r.id << ',' << format_double(r.score) << ',' << r.label << '\n';
  }
}

std::vector<ScoreRow> read_scores(const std::string& path) {
  auto is = open_in(path);
  std::vector<ScoreRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line == "id,score,label") continue;
    const std::size_t first = line.find(',');
    const std::size_t second = first == std::string::npos ? first : line.find(',', first + 1);
    if (second == std::string::npos)
      throw DataError(path + ":" + std::to_string(line_no) + ": expected id,score,label");
    ScoreRow r;
    r.id = line.substr(0, first);
    r.label = line.substr(second + 1);
    try {
      r.score = parse_double(std::string_view(line).substr(first + 1, second - first - 1));
    } catch (const DataError& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_ecdf(const std::string& path, std::span<const std::pair<double, double>> steps) {
  auto os = open_out(path);
  os << "value,fraction\n";
  for (const auto& [value, fraction] : steps)
    os << format_double(value) << ',' << format_double(fraction) << '\n';
}

}  // namespace sigconf
