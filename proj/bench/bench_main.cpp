// Benchmarks the OpenMP batch kernels against their serial reference
// implementations: wall time, speedup and the largest elementwise
// difference. Both versions run identical per-row arithmetic, only the
// distribution of rows over threads differs, so the difference must be
// exactly zero; anything else means the parallel path drifted from the
// reference.

#include <omp.h>

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "sigconf/conformance.hpp"
#include "sigconf/rng.hpp"
#include "sigconf/signature.hpp"
#include "sigconf/stream.hpp"
#include "sigconf/words.hpp"

namespace {

using namespace sigconf;

std::vector<Stream> random_walks(Rng& rng, std::size_t count, std::size_t points,
                                 std::size_t dim) {
  std::vector<Stream> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Stream s;
    s.dim = dim;
    s.data.resize(points * dim);
    std::vector<double> pos(dim, 0.0);
    for (std::size_t p = 0; p < points; ++p)
      for (std::size_t j = 0; j < dim; ++j) {
        pos[j] += rng.uniform(-1.0, 1.0);
        s.data[p * dim + j] = pos[j];
      }
    out.push_back(std::move(s));
  }
  return out;
}

// Minimum wall time over reps, after one untimed warmup call.
template <typename F>
double time_best(int reps, F&& fn) {
  fn();
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

// Matching infinities count as equal; any structural disagreement
// (nearest corpus row, out-of-span flag) is reported as a mismatch.
struct ScoreDelta {
  double worst_value = 0.0;
  std::size_t mismatches = 0;
};

ScoreDelta score_diff(const std::vector<Score>& a, const std::vector<Score>& b) {
  ScoreDelta d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].out_of_span != b[i].out_of_span || a[i].nearest_index != b[i].nearest_index) {
      ++d.mismatches;
      continue;
    }
    if (std::isinf(a[i].value) && std::isinf(b[i].value)) continue;
    d.worst_value = std::max(d.worst_value, std::abs(a[i].value - b[i].value));
  }
  return d;
}

void report(const char* name, double serial_s, double parallel_s) {
  std::printf("%-22s serial %8.1f ms   parallel %8.1f ms   speedup %.2fx\n", name,
              serial_s * 1e3, parallel_s * 1e3, serial_s / parallel_s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"batch kernel benchmark: OpenMP vs serial reference"};
  std::size_t n_streams = 2000, points = 200, dim = 3, order = 4;
  std::size_t corpus_rows = 800, queries = 1200;
  int reps = 3, threads = 0;
  app.add_option("--streams", n_streams, "streams in the signature batch");
  app.add_option("--points", points, "points per stream");
  app.add_option("--dim", dim, "stream dimension");
  app.add_option("--order", order, "signature truncation order");
  app.add_option("--corpus", corpus_rows, "corpus rows for the conformance model");
  app.add_option("--queries", queries, "query rows to score");
  app.add_option("--reps", reps, "timed repetitions (best is reported)");
  app.add_option("--threads", threads, "OpenMP threads (0 = runtime default)");
  CLI11_PARSE(app, argc, argv);

  if (threads > 0) omp_set_num_threads(threads);
  const std::size_t width = sig_dim(dim, order);
  std::printf("threads %d, %zu streams of %zu x %zu points, order %zu (%zu features)\n",
              omp_get_max_threads(), n_streams, points, dim, order, width);

  Rng rng(42);
  const std::vector<Stream> streams = random_walks(rng, n_streams, points, dim);

  std::vector<double> sig_par, sig_ser;
  const double t_sig_par = time_best(reps, [&] { sig_par = signature_batch(streams, order); });
  const double t_sig_ser =
      time_best(reps, [&] { sig_ser = signature_batch_serial(streams, order); });
  report("signature_batch", t_sig_ser, t_sig_par);
  std::printf("%-22s max |delta| %.3g\n", "", max_abs_diff(sig_par, sig_ser));

  if (corpus_rows + queries > n_streams) {
    std::fprintf(stderr, "need corpus + queries <= streams (%zu + %zu > %zu)\n", corpus_rows,
                 queries, n_streams);
    return 2;
  }
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> feats(
      sig_ser.data(), static_cast<Eigen::Index>(n_streams), static_cast<Eigen::Index>(width));
  const Eigen::MatrixXd corpus = feats.topRows(static_cast<Eigen::Index>(corpus_rows));
  const Eigen::MatrixXd xs = feats.bottomRows(static_cast<Eigen::Index>(queries));
  const ConformanceModel model = fit(corpus);
  std::printf("conformance model: %zu x %zu corpus, rank %ld, %zu queries\n", corpus_rows, width,
              static_cast<long>(model.rank), queries);

  std::vector<Score> conf_par, conf_ser;
  const double t_conf_par = time_best(reps, [&] { conf_par = conformance_batch(model, xs); });
  const double t_conf_ser =
      time_best(reps, [&] { conf_ser = conformance_batch_serial(model, xs); });
  report("conformance_batch", t_conf_ser, t_conf_par);
  const ScoreDelta delta = score_diff(conf_par, conf_ser);
  std::printf("%-22s max |delta| %.3g, %zu structural mismatches\n", "", delta.worst_value,
              delta.mismatches);
  return 0;
}
