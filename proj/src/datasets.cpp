#include "sigconf/datasets.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <utility>

#include "sigconf/errors.hpp"
#include "sigconf/io.hpp"
#include "sigconf/rng.hpp"

namespace sigconf {

namespace {

[[noreturn]] void fail_at(const std::string& path, std::size_t line_no, const std::string& what) {
  throw DataError(path + ":" + std::to_string(line_no) + ": " + what);
}

std::string trim(std::string_view v) {
  std::size_t b = 0, e = v.size();
  while (b < e && std::isspace(static_cast<unsigned char>(v[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(v[e - 1]))) --e;
  return std::string(v.substr(b, e - b));
}

std::ifstream open_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

// Reads one line, stripping a trailing CR and, on the first line, a BOM.
bool next_line(std::ifstream& in, std::string& line, std::size_t& line_no) {
  if (!std::getline(in, line)) return false;
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
    line.erase(0, 3);
  return true;
}

bool parse_double_opt(std::string_view t, double& out) {
  const char* b = t.data();
  const char* e = b + t.size();
  auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e;
}

// Labels arrive as "1", "1.0" or "1.0000000e+00" depending on the file;
// integral values canonicalize to their plain integer spelling.
std::string canonical_label(double v) {
  if (std::nearbyint(v) == v && std::abs(v) < 9.0e15)
    return std::to_string(static_cast<long long>(v));
  return format_double(v);
}

}  // namespace

std::vector<Stream> load_unipen(const std::string& path, std::string_view id_prefix) {
  std::ifstream in = open_text(path);
  std::vector<Stream> out;
  std::string line;
  std::size_t line_no = 0;

  bool in_segment = false;
  bool pen_down = false;
  std::size_t segment_line = 0;
  Stream cur;

  auto finish = [&] {
    if (!in_segment) return;
    if (cur.size() == 0)
      fail_at(path, segment_line, "segment \"" + cur.label + "\" has no pen-down points");
    out.push_back(std::move(cur));
    cur = Stream{};
    in_segment = false;
    pen_down = false;
  };

  while (next_line(in, line, line_no)) {
    std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '.') {
      if (t.rfind(".SEGMENT", 0) == 0) {
        finish();
        std::size_t q1 = t.find('"');
        std::size_t q2 = (q1 == std::string::npos) ? std::string::npos : t.find('"', q1 + 1);
        if (q2 == std::string::npos) fail_at(path, line_no, "segment header without quoted label");
        in_segment = true;
        segment_line = line_no;
        cur.dim = 2;
        cur.label = t.substr(q1 + 1, q2 - q1 - 1);
        cur.id = std::string(id_prefix) + "-" + std::to_string(out.size());
      } else if (t.rfind(".PEN_DOWN", 0) == 0) {
        pen_down = true;
      } else if (t.rfind(".PEN_UP", 0) == 0) {
        pen_down = false;
      }
      // other dot-keywords (.COMMENT, .DT, .X_DIM, ...) carry no geometry
      continue;
    }
    if (!in_segment || !pen_down) continue;  // pen-up movement is not part of the trace
    std::istringstream fields(t);
    double x = 0.0, y = 0.0;
    std::string extra;
    if (!(fields >> x >> y) || (fields >> extra))
      fail_at(path, line_no, "expected two coordinates, got \"" + t + "\"");
    if (!std::isfinite(x) || !std::isfinite(y))
      fail_at(path, line_no, "non-finite coordinate");
    cur.data.push_back(x);
    cur.data.push_back(y);
  }
  finish();
  if (out.empty()) throw DataError(path + ": no segments found");
  return out;
}

LabeledCorpus load_pendigits(const std::string& train_path, const std::string& test_path) {
  LabeledCorpus out;
  auto add = [&](std::vector<Stream> streams, SplitTag tag) {
    for (Stream& s : streams) {
      if (s.label.size() != 1 || s.label[0] < '0' || s.label[0] > '9')
        throw DataError("stream " + s.id + ": label \"" + s.label + "\" is not a digit");
      out.streams.push_back(std::move(s));
      out.tags.push_back(tag);
    }
  };
  add(load_unipen(train_path, "tra"), SplitTag::Train);
  add(load_unipen(test_path, "tes"), SplitTag::Test);
  return out;
}

namespace {

std::vector<std::string> split_delimited(const std::string& line, char delim) {
  std::vector<std::string> out;
  if (delim == ' ') {  // any whitespace run
    std::istringstream fields(line);
    std::string tok;
    while (fields >> tok) out.push_back(tok);
    return out;
  }
  std::string cur;
  for (char c : line) {
    if (c == delim) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

void read_ucr_into(LabeledCorpus& corpus, const std::string& path, std::size_t& expected_len) {
  std::ifstream in = open_text(path);
  std::string line;
  std::size_t line_no = 0;
  char delim = 0;
  while (next_line(in, line, line_no)) {
    if (trim(line).empty()) continue;
    if (delim == 0)
      delim = line.find(',') != std::string::npos   ? ','
              : line.find('\t') != std::string::npos ? '\t'
                                                      : ' ';
    std::vector<std::string> tok = split_delimited(line, delim);
    if (tok.size() < 2) fail_at(path, line_no, "row needs a label and at least one value");
    double label_v = 0.0;
    if (!parse_double_opt(trim(tok[0]), label_v))
      fail_at(path, line_no, "unreadable class label \"" + tok[0] + "\"");
    Stream s;
    s.id = path.substr(path.find_last_of('/') + 1) + ":" + std::to_string(line_no);
    s.label = canonical_label(label_v);
    s.dim = 1;
    s.data.reserve(tok.size() - 1);
    for (std::size_t i = 1; i < tok.size(); ++i) {
      double v = 0.0;
      if (!parse_double_opt(trim(tok[i]), v) || !std::isfinite(v))
        fail_at(path, line_no, "unreadable value \"" + tok[i] + "\"");
      s.data.push_back(v);
    }
    if (expected_len == 0) expected_len = s.data.size();
    if (s.data.size() != expected_len)
      fail_at(path, line_no,
              "row length " + std::to_string(s.data.size()) + " differs from " +
                  std::to_string(expected_len));
    corpus.streams.push_back(std::move(s));
    corpus.tags.push_back(SplitTag::Train);
  }
}

}  // namespace

LabeledCorpus load_ucr(const std::string& path) {
  LabeledCorpus out;
  std::size_t expected_len = 0;
  read_ucr_into(out, path, expected_len);
  if (out.streams.empty()) throw DataError(path + ": no rows");
  return out;
}

void append_ucr(LabeledCorpus& corpus, const std::string& path) {
  std::size_t expected_len = corpus.streams.empty() ? 0 : corpus.streams.front().size();
  read_ucr_into(corpus, path, expected_len);
}

std::string smallest_label(const LabeledCorpus& corpus) {
  if (corpus.streams.empty()) throw DataError("empty corpus has no labels");
  bool have = false;
  double best_v = 0.0;
  std::string best;
  for (const Stream& s : corpus.streams) {
    double v = 0.0;
    bool numeric = parse_double_opt(s.label, v);
    if (!have) {
      have = true;
      best = s.label;
      best_v = numeric ? v : std::numeric_limits<double>::infinity();
    } else if (numeric ? v < best_v : (!std::isfinite(best_v) && s.label < best)) {
      best = s.label;
      best_v = numeric ? v : best_v;
    }
  }
  return best;
}

namespace {

std::vector<std::string> split_csv_quoted(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

// Civil date to days since 1970-01-01 (Howard Hinnant's algorithm).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

// "YYYY-MM-DD[T ]HH:MM:SS[.frac]" to epoch seconds; false on anything else.
bool parse_iso_time(std::string_view t, double& out) {
  auto num = [&](std::size_t pos, std::size_t len, int lo, int hi, int& v) {
    if (pos + len > t.size()) return false;
    auto res = std::from_chars(t.data() + pos, t.data() + pos + len, v);
    return res.ec == std::errc() && res.ptr == t.data() + pos + len && v >= lo && v <= hi;
  };
  int Y, M, D, h, m, s;
  if (!num(0, 4, 1, 9999, Y) || t.size() < 19) return false;
  if (t[4] != '-' || t[7] != '-' || (t[10] != 'T' && t[10] != ' ') || t[13] != ':' ||
      t[16] != ':')
    return false;
  if (!num(5, 2, 1, 12, M) || !num(8, 2, 1, 31, D) || !num(11, 2, 0, 23, h) ||
      !num(14, 2, 0, 59, m) || !num(17, 2, 0, 60, s))
    return false;
  double frac = 0.0;
  if (t.size() > 19) {
    if (t[19] != '.') return false;
    if (!parse_double_opt(t.substr(19), frac) || frac < 0.0 || frac >= 1.0) return false;
  }
  out = static_cast<double>(days_from_civil(Y, static_cast<unsigned>(M),
                                            static_cast<unsigned>(D))) *
            86400.0 +
        h * 3600.0 + m * 60.0 + s + frac;
  return true;
}

}  // namespace

std::vector<VesselRecord> load_ais(const std::string& path, const AisColumns& columns,
                                   AisLoadStats* stats) {
  std::ifstream in = open_text(path);
  std::string line;
  std::size_t line_no = 0;
  if (!next_line(in, line, line_no)) throw DataError(path + ": empty file");
  std::vector<std::string> header = split_csv_quoted(line);
  auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (trim(header[i]) == name) return i;
    throw DataError(path + ": missing column \"" + name + "\" in header \"" + line + "\"");
  };
  const std::size_t c_id = col(columns.id);
  const std::size_t c_time = col(columns.time);
  const std::size_t c_lat = col(columns.lat);
  const std::size_t c_lon = col(columns.lon);
  const std::size_t c_len = col(columns.length);

  struct Row {
    double t, lat, lon;
  };
  struct Vessel {
    std::vector<Row> rows;
    double length = 0.0;
    bool length_ok = true;
  };
  std::map<std::string, Vessel> vessels;  // ordered: deterministic output

  AisLoadStats local;
  AisLoadStats& st = stats ? *stats : local;
  st = AisLoadStats{};

  while (next_line(in, line, line_no)) {
    if (line.empty()) continue;
    ++st.rows;
    std::vector<std::string> f = split_csv_quoted(line);
    if (f.size() != header.size())
      fail_at(path, line_no,
              "expected " + std::to_string(header.size()) + " fields, got " +
                  std::to_string(f.size()));
    std::string id = trim(f[c_id]);
    if (id.empty()) {
      ++st.dropped_no_id;
      continue;
    }
    double lat = 0.0, lon = 0.0;
    if (!parse_double_opt(trim(f[c_lat]), lat) || !parse_double_opt(trim(f[c_lon]), lon) ||
        lat < -90.0 || lat > 90.0 || lon < -180.0 || lon > 180.0) {
      ++st.dropped_bad_coords;
      continue;
    }
    double t = 0.0;
    if (!parse_iso_time(trim(f[c_time]), t)) {
      ++st.dropped_bad_time;
      continue;
    }
    Vessel& v = vessels[id];
    double len = 0.0;
    if (!parse_double_opt(trim(f[c_len]), len) || !(len > 0.0))
      v.length_ok = false;
    else
      v.length = len;
    v.rows.push_back({t, lat, lon});
  }

  std::vector<VesselRecord> out;
  out.reserve(vessels.size());
  for (auto& [id, v] : vessels) {
    if (!v.length_ok) {
      ++st.vessels_dropped_bad_length;
      continue;
    }
    std::stable_sort(v.rows.begin(), v.rows.end(),
                     [](const Row& a, const Row& b) { return a.t < b.t; });
    VesselRecord rec;
    rec.vessel_id = id;
    rec.length_m = v.length;
    rec.track.id = id;
    rec.track.dim = 2;
    double prev_t = -std::numeric_limits<double>::infinity();
    for (const Row& r : v.rows) {
      if (r.t == prev_t) {
        ++st.dropped_duplicate_time;
        continue;
      }
      prev_t = r.t;
      rec.track.data.push_back(r.lat);
      rec.track.data.push_back(r.lon);
      rec.track.timestamps.push_back(r.t);
    }
    out.push_back(std::move(rec));
  }
  if (out.empty()) throw DataError(path + ": no usable vessels");
  return out;
}

namespace {

// Weighted sample without replacement, k largest of key u^(1/w) per item
// (Efraimidis-Spirakis). Weight is 1/(sub-streams of the item's vessel),
// so comparisons use count*log(u), avoiding underflow of u^count. Output
// keeps pool order. Pools no larger than k pass through whole.
std::vector<Stream> weighted_sample(const std::vector<std::vector<Stream>>& by_vessel,
                                    std::size_t k, std::uint64_t seed) {
  std::vector<const Stream*> flat;
  std::vector<double> group_size;
  for (const auto& subs : by_vessel)
    for (const Stream& s : subs) {
      flat.push_back(&s);
      group_size.push_back(static_cast<double>(subs.size()));
    }
  std::vector<std::size_t> chosen;
  if (flat.size() <= k) {
    chosen.resize(flat.size());
    std::iota(chosen.begin(), chosen.end(), std::size_t{0});
  } else {
    Rng rng(seed);
    std::vector<std::pair<double, std::size_t>> keyed(flat.size());
    for (std::size_t i = 0; i < flat.size(); ++i)
      keyed[i] = {group_size[i] * std::log(rng.next_double()), i};
    std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(k),
                      keyed.end(), [](const auto& a, const auto& b) {
                        return a.first > b.first || (a.first == b.first && a.second < b.second);
                      });
    chosen.reserve(k);
    for (std::size_t i = 0; i < k; ++i) chosen.push_back(keyed[i].second);
    std::sort(chosen.begin(), chosen.end());
  }
  std::vector<Stream> out;
  out.reserve(chosen.size());
  for (std::size_t i : chosen) out.push_back(*flat[i]);
  return out;
}

}  // namespace

AisExperiment build_ais_experiment(std::span<const VesselRecord> records,
                                   const AisParams& params) {
  if (params.compress_threshold_m < 0.0 || params.segment_len_m <= 0.0 ||
      params.max_gap_m <= 0.0 || params.min_displacement_m < 0.0)
    throw ConfigError("trajectory thresholds must be positive");
  if (params.anomaly_max_length_m > params.normal_min_length_m)
    throw ConfigError("anomaly length bound exceeds the normal length bound");
  if (params.sample_per_subset == 0) throw ConfigError("sample size must be positive");

  AisExperiment out;
  std::vector<std::vector<Stream>> normal_subs, anomaly_subs;
  for (const VesselRecord& rec : records) {
    if (rec.track.size() < 2) continue;
    Stream c = compress(rec.track, params.compress_threshold_m, DistanceKind::Haversine);
    if (c.size() < 2) continue;
    if (haversine_m(c.coord(0, 0), c.coord(0, 1), c.coord(c.size() - 1, 0),
                    c.coord(c.size() - 1, 1)) <= params.min_displacement_m)
      continue;
    std::vector<Stream> subs = disintegrate(c, params.segment_len_m, params.max_gap_m,
                                            DistanceKind::Haversine, params.measure);
    if (subs.empty()) continue;
    if (rec.length_m > params.normal_min_length_m) {
      for (Stream& s : subs) s.label = "normal";
      normal_subs.push_back(std::move(subs));
    } else if (rec.length_m <= params.anomaly_max_length_m) {
      for (Stream& s : subs) s.label = "anomaly";
      anomaly_subs.push_back(std::move(subs));
    } else {
      ++out.excluded_vessels;
    }
  }
  out.normal_vessels = normal_subs.size();
  out.anomaly_vessels = anomaly_subs.size();
  if (normal_subs.size() < 2)
    throw DataError("need at least two normal vessels to split, have " +
                    std::to_string(normal_subs.size()));
  if (anomaly_subs.empty()) throw DataError("no anomalous vessels survive the filters");

  // Vessel-level split so no vessel contributes to both corpus and test;
  // the corpus half takes the extra vessel on odd counts.
  std::vector<std::size_t> perm(normal_subs.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng(Rng::derive(params.seed, 0)).shuffle(perm);
  out.corpus_vessels = (normal_subs.size() + 1) / 2;

  std::vector<std::vector<Stream>> corpus_pool, ntest_pool;
  for (std::size_t i = 0; i < perm.size(); ++i)
    (i < out.corpus_vessels ? corpus_pool : ntest_pool).push_back(std::move(normal_subs[perm[i]]));

  out.corpus = weighted_sample(corpus_pool, params.sample_per_subset, Rng::derive(params.seed, 1));
  out.normal_test =
      weighted_sample(ntest_pool, params.sample_per_subset, Rng::derive(params.seed, 2));
  out.anomaly_test =
      weighted_sample(anomaly_subs, params.sample_per_subset, Rng::derive(params.seed, 3));
  return out;
}

}  // namespace sigconf
