#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "sigconf/words.hpp"

namespace sigconf {

// Every interleaving of u and v that keeps the internal order of each
// word, with repetitions: C(|u| + |v|, |u|) entries in total.
std::vector<Word> shuffle_words(const Word& u, const Word& v);

// u shuffle v expanded in the word basis over {1..d}: pairs of graded-lex
// index and integer multiplicity, sorted by index. All indices lie in the
// level |u| + |v| block.
std::vector<std::pair<std::size_t, double>> shuffle_product(const Word& u, const Word& v,
                                                            std::size_t d);

// <u shuffle v, t> for a flat tensor t truncated at order >= |u| + |v|.
// For a signature t of truncation order 2N and words of length <= N this
// equals the product of the two single-word coefficients.
double shuffle_pairing(const Word& u, const Word& v, std::span<const double> t, std::size_t d);

// Bilinear extension to coefficient vectors over words of length <= order:
// the result lives over words of length <= 2*order and satisfies
// <f, Sig_N> * <g, Sig_N> = <shuffle_apply(f, g), Sig_2N> for every stream.
std::vector<double> shuffle_apply(std::span<const double> f, std::span<const double> g,
                                  std::size_t d, std::size_t order);

// Expansions of u shuffle v for every pair of words with |u|, |v| <= order,
// computed once. Read-only afterwards, so one table may be shared across
// threads.
class ShuffleTable {
 public:
  ShuffleTable(std::size_t d, std::size_t order);

  std::size_t dim() const { return d_; }
  std::size_t order() const { return order_; }

  // Expansion of word_at(i) shuffle word_at(j), indices below sig_dim(d, order).
  const std::vector<std::pair<std::size_t, double>>& expansion(std::size_t i,
                                                               std::size_t j) const;

 private:
  std::size_t d_;
  std::size_t order_;
  std::size_t width_;
  std::vector<std::vector<std::pair<std::size_t, double>>> pairs_;  // i * width_ + j
};

}  // namespace sigconf
