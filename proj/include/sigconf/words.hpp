#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace sigconf {

// A word is a finite sequence of letters in {1..d}; the empty word is
// allowed. Words index signature coordinates: the coefficient vector is
// ordered first by word length, then lexicographically within a length
// (graded-lexicographic order). This order is fixed globally so vectors
// are comparable across modules and persisted models.
using Letter = std::uint32_t;
using Word = std::vector<Letter>;

// 1 + d + d^2 + ... + d^order. Throws std::overflow_error if the value
// does not fit in std::size_t.
std::size_t sig_dim(std::size_t d, std::size_t order);

// d^k with overflow checking.
std::size_t level_size(std::size_t d, std::size_t k);

// Index of the first word of length k in the graded-lex order
// (0 for k = 0, sig_dim(d, k-1) otherwise).
std::size_t level_offset(std::size_t d, std::size_t k);

// Global graded-lex index of a word over alphabet {1..d}.
std::size_t word_index(const Word& w, std::size_t d);

// Inverse of word_index.
Word word_at(std::size_t index, std::size_t d);

// Compact rendering for diagnostics, e.g. "121"; letters are separated
// by dots when d > 9. The empty word renders as "e".
std::string word_str(const Word& w);

}  // namespace sigconf
