#include "sigconf/signature.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

#include "sigconf/errors.hpp"
#include "sigconf/words.hpp"

namespace sigconf {

namespace {

// Writes the segment signature into out (size sig_dim(d, order)). Level k
// is the k-fold tensor power of the increment divided by k!.
void segment_signature_into(std::span<const double> inc, std::size_t order,
                            std::vector<double>& out) {
  const std::size_t d = inc.size();
  out.assign(sig_dim(d, order), 0.0);
  out[0] = 1.0;
  for (std::size_t k = 1; k <= order; ++k) {
    const double* prev = out.data() + level_offset(d, k - 1);
    double* cur = out.data() + level_offset(d, k);
    const std::size_t prev_n = level_size(d, k - 1);
    const double inv_k = 1.0 / static_cast<double>(k);
    for (std::size_t i = 0; i < prev_n; ++i) {
      const double base = prev[i] * inv_k;
      for (std::size_t j = 0; j < d; ++j) cur[i * d + j] = base * inc[j];
    }
  }
}

// Signature of a pre-validated stream, written into out[0..width).
void signature_into(const Stream& s, std::size_t order, double* out,
                    std::vector<double>& seg_buf, std::vector<double>& inc_buf) {
  const std::size_t d = s.dim;
  const std::size_t width = sig_dim(d, order);
  std::fill(out, out + width, 0.0);
  out[0] = 1.0;
  std::vector<double> acc(out, out + width);
  inc_buf.resize(d);
  for (std::size_t i = 1; i < s.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) inc_buf[j] = s.coord(i, j) - s.coord(i - 1, j);
    segment_signature_into(inc_buf, order, seg_buf);
    chen_multiply(acc, seg_buf, d, order);
  }
  std::copy(acc.begin(), acc.end(), out);
}

std::size_t batch_dim(std::span<const Stream> streams) {
  if (streams.empty()) throw DataError("signature batch: no streams");
  const std::size_t d = streams[0].dim;
  for (const Stream& s : streams) {
    s.validate();
    if (s.dim != d) throw DataError("signature batch: mixed stream dimensions");
  }
  return d;
}

}  // namespace

std::vector<double> segment_signature(std::span<const double> increment, std::size_t order) {
  if (increment.empty()) throw ConfigError("segment_signature: empty increment");
  std::vector<double> out;
  segment_signature_into(increment, order, out);
  return out;
}

void chen_multiply(std::vector<double>& a, std::span<const double> b, std::size_t d,
                   std::size_t order) {
  const std::size_t want = sig_dim(d, order);
  if (a.size() != want || b.size() != want)
    throw ConfigError("chen_multiply: operand size mismatch");
  // Top-down: level m of the product reads only levels < m of a, which
  // are still untouched, plus level m of a itself (scaled first).
  const double b0 = b[0];
  for (std::size_t m = order; m > 0; --m) {
    double* out = a.data() + level_offset(d, m);
    const std::size_t out_n = level_size(d, m);
    for (std::size_t i = 0; i < out_n; ++i) out[i] *= b0;
    for (std::size_t p = 0; p < m; ++p) {
      const std::size_t q = m - p;
      const double* ap = a.data() + level_offset(d, p);
      const double* bq = b.data() + level_offset(d, q);
      const std::size_t pn = level_size(d, p);
      const std::size_t qn = level_size(d, q);
      for (std::size_t i = 0; i < pn; ++i) {
        const double ai = ap[i];
        if (ai == 0.0) continue;
        double* row = out + i * qn;
        for (std::size_t j = 0; j < qn; ++j) row[j] += ai * bq[j];
      }
    }
  }
  a[0] *= b0;
}

std::vector<double> chen_product(std::span<const double> a, std::span<const double> b,
                                 std::size_t d, std::size_t order) {
  std::vector<double> out(a.begin(), a.end());
  chen_multiply(out, b, d, order);
  return out;
}

std::vector<double> signature(const Stream& s, std::size_t order) {
  s.validate();
  std::vector<double> out(sig_dim(s.dim, order));
  std::vector<double> seg, inc;
  signature_into(s, order, out.data(), seg, inc);
  return out;
}

std::vector<double> signature_batch_serial(std::span<const Stream> streams, std::size_t order) {
  const std::size_t d = batch_dim(streams);
  const std::size_t width = sig_dim(d, order);
  std::vector<double> rows(streams.size() * width);
  std::vector<double> seg, inc;
  for (std::size_t r = 0; r < streams.size(); ++r)
    signature_into(streams[r], order, rows.data() + r * width, seg, inc);
  return rows;
}

std::vector<double> signature_batch(std::span<const Stream> streams, std::size_t order) {
  const std::size_t d = batch_dim(streams);
  const std::size_t width = sig_dim(d, order);
  std::vector<double> rows(streams.size() * width);
  const std::int64_t n = static_cast<std::int64_t>(streams.size());
#pragma omp parallel
  {
    std::vector<double> seg, inc;
#pragma omp for schedule(dynamic, 16)
    for (std::int64_t r = 0; r < n; ++r)
      signature_into(streams[static_cast<std::size_t>(r)], order,
                     rows.data() + static_cast<std::size_t>(r) * width, seg, inc);
  }
  return rows;
}

}  // namespace sigconf
