#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sigconf/pipeline.hpp"
#include "sigconf/stream.hpp"

namespace sigconf {

// Shortest decimal rendering that parses back to the same bits;
// infinities render as "inf" / "-inf" and parse back as such.
std::string format_double(double v);
double parse_double(std::string_view text);

// Stream interchange: one JSON object per line with fields id (string),
// label (string, omitted when empty), timestamps (array of reals, omitted
// when absent) and points (array of per-point coordinate arrays). Parse
// errors carry the origin and line number.
void write_streams(std::ostream& os, std::span<const Stream> streams);
void write_streams_file(const std::string& path, std::span<const Stream> streams);
std::vector<Stream> read_streams(std::istream& is, const std::string& origin = "<streams>");
std::vector<Stream> read_streams_file(const std::string& path);

// Model persistence: a single JSON document holding the pipeline metadata,
// spectral data, corpus features and optional calibration. Every
// floating-point field round-trips bit-exactly, so a loaded model scores
// identically to the one in memory.
void save_model(const std::string& path, const FittedPipeline& fp);
FittedPipeline load_model(const std::string& path);

// Score files: header "id,score,label"; score is decimal or "inf". The id
// and label fields must not contain commas or line breaks.
struct ScoreRow {
  std::string id;
  double score = 0.0;
  std::string label;
};
void write_scores(const std::string& path, std::span<const ScoreRow> rows);
std::vector<ScoreRow> read_scores(const std::string& path);

// ECDF steps as "value,fraction" lines for external plotting.
void write_ecdf(const std::string& path, std::span<const std::pair<double, double>> steps);

}  // namespace sigconf
