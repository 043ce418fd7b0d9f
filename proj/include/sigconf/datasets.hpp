#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sigconf/stream.hpp"

namespace sigconf {

enum class SplitTag { Train, Test };

// Class-labeled streams with an annotator train/test tag per stream. The
// class lives in Stream::label; normal_class designates which class is
// considered normal (may stay empty until an experiment chooses one).
struct LabeledCorpus {
  std::vector<Stream> streams;
  std::vector<SplitTag> tags;  // parallel to streams
  std::string normal_class;
};

// UNIPEN-style trajectory file: .SEGMENT blocks carrying a quoted label,
// .PEN_DOWN/.PEN_UP brackets around "x y" coordinate lines. Strokes of a
// segment are concatenated in order (a pen-up gap becomes a straight
// segment); coordinates while the pen is up are ignored. Structural
// problems are reported with path and line number.
std::vector<Stream> load_unipen(const std::string& path, std::string_view id_prefix);

// The original (unresampled) pen trajectory digits: annotator train and
// test files. Labels must be the digits 0-9.
LabeledCorpus load_pendigits(const std::string& train_path, const std::string& test_path);

// Delimited text (comma, tab or spaces), one series per row, class label
// first. Rows must agree in length; values become 1-d streams. Labels are
// canonicalized so "1", "1.0" and "1.0000000e+00" all read as "1".
LabeledCorpus load_ucr(const std::string& path);
// The archive ships each set as two files; this merges further rows in.
void append_ucr(LabeledCorpus& corpus, const std::string& path);

// Smallest label in numeric order (falling back to lexicographic for
// non-numeric labels): the default normal-class designation.
std::string smallest_label(const LabeledCorpus& corpus);

struct VesselRecord {
  std::string vessel_id;
  Stream track;  // (latitude deg, longitude deg), epoch-second timestamps
  double length_m = 0.0;
};

struct AisColumns {
  std::string id = "MMSI";
  std::string time = "BaseDateTime";
  std::string lat = "LAT";
  std::string lon = "LON";
  std::string length = "Length";
};

struct AisLoadStats {
  std::size_t rows = 0;
  std::size_t dropped_no_id = 0;
  std::size_t dropped_bad_coords = 0;
  std::size_t dropped_bad_time = 0;
  std::size_t dropped_duplicate_time = 0;
  std::size_t vessels_dropped_bad_length = 0;
};

// Groups position reports by vessel id, sorted by timestamp with
// duplicate timestamps dropped (first kept). Rows with a missing id or
// unparseable coordinates/timestamps are counted and skipped; a vessel
// with any missing or invalid length field is excluded entirely.
std::vector<VesselRecord> load_ais(const std::string& path, const AisColumns& columns,
                                   AisLoadStats* stats = nullptr);

struct AisParams {
  double compress_threshold_m = 10.0;
  double min_displacement_m = 5000.0;  // initial-to-final, after compression
  double segment_len_m = 8000.0;
  double max_gap_m = 1000.0;
  SegmentMeasure measure = SegmentMeasure::CumulativePath;
  double normal_min_length_m = 100.0;  // strictly longer vessels are normal
  double anomaly_max_length_m = 50.0;  // vessels at most this long are anomalous
  std::size_t sample_per_subset = 5000;
  std::uint64_t seed = 0;
};

struct AisExperiment {
  std::vector<Stream> corpus;
  std::vector<Stream> normal_test;
  std::vector<Stream> anomaly_test;
  std::size_t normal_vessels = 0;   // vessels contributing sub-streams, before the split
  std::size_t anomaly_vessels = 0;
  std::size_t corpus_vessels = 0;   // normal vessels assigned to the corpus half
  std::size_t excluded_vessels = 0; // length between the two thresholds
};

// The trajectory pipeline: compress, keep vessels whose initial-to-final
// displacement exceeds the minimum, disintegrate, partition by vessel
// length, split normal vessels (not sub-streams) into corpus and test
// halves, then draw a weighted sample per subset with per-vessel weight
// inversely proportional to its sub-stream count, so every vessel expects
// equal representation.
AisExperiment build_ais_experiment(std::span<const VesselRecord> records,
                                   const AisParams& params);

}  // namespace sigconf
