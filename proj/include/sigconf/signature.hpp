#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sigconf/stream.hpp"

namespace sigconf {

// Truncated signatures are stored flat in graded-lex word order (see
// words.hpp). Entry 0 is the empty-word coefficient and equals 1 for any
// signature. A vector for dimension d truncated at `order` has
// sig_dim(d, order) entries.

// Signature of one linear segment with the given increment: the
// coefficient of the word (i_1 .. i_k) is inc[i_1] * ... * inc[i_k] / k!.
std::vector<double> segment_signature(std::span<const double> increment, std::size_t order);

// Truncated concatenation product: the signature of a concatenated path
// from the signatures of its two pieces. Defined for arbitrary truncated
// tensors, not just signatures.
std::vector<double> chen_product(std::span<const double> a, std::span<const double> b,
                                 std::size_t d, std::size_t order);

// a <- chen_product(a, b). Levels are filled top-down, so no scratch
// buffer is needed.
void chen_multiply(std::vector<double>& a, std::span<const double> b, std::size_t d,
                   std::size_t order);

// Truncated signature of a piecewise-linear stream. A single-point stream
// has the trivial signature (1, 0, ..., 0).
std::vector<double> signature(const Stream& s, std::size_t order);

// Signatures of many streams: one row of sig_dim(d, order) values per
// stream, row-major. All streams must share one dimension. The parallel
// version distributes streams over OpenMP threads; each row is computed
// independently with the same per-stream arithmetic, so the output does
// not depend on the thread count.
std::vector<double> signature_batch(std::span<const Stream> streams, std::size_t order);
std::vector<double> signature_batch_serial(std::span<const Stream> streams, std::size_t order);

}  // namespace sigconf
