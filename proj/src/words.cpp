#include "sigconf/words.hpp"

#include <limits>
#include <stdexcept>

#include "sigconf/errors.hpp"

namespace sigconf {

namespace {

constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();

std::size_t checked_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > kMax / a) throw std::overflow_error("sig_dim: size overflow");
  return a * b;
}

std::size_t checked_add(std::size_t a, std::size_t b) {
  if (b > kMax - a) throw std::overflow_error("sig_dim: size overflow");
  return a + b;
}

}  // namespace

std::size_t level_size(std::size_t d, std::size_t k) {
  std::size_t p = 1;
  for (std::size_t i = 0; i < k; ++i) p = checked_mul(p, d);
  return p;
}

std::size_t sig_dim(std::size_t d, std::size_t order) {
  if (d < 1) throw ConfigError("sig_dim: dimension must be >= 1");
  std::size_t total = 1;
  std::size_t p = 1;
  for (std::size_t k = 1; k <= order; ++k) {
    p = checked_mul(p, d);
    total = checked_add(total, p);
  }
  return total;
}

std::size_t level_offset(std::size_t d, std::size_t k) {
  return k == 0 ? 0 : sig_dim(d, k - 1);
}

std::size_t word_index(const Word& w, std::size_t d) {
  std::size_t within = 0;
  for (Letter a : w) {
    if (a < 1 || a > d) throw ConfigError("word_index: letter out of range");
    within = checked_add(checked_mul(within, d), a - 1);
  }
  return checked_add(level_offset(d, w.size()), within);
}

Word word_at(std::size_t index, std::size_t d) {
  std::size_t k = 0;
  std::size_t block = 1;  // d^k
  while (index >= block) {
    index -= block;
    block = checked_mul(block, d);
    ++k;
  }
  Word w(k);
  for (std::size_t j = k; j-- > 0;) {
    w[j] = static_cast<Letter>(index % d + 1);
    index /= d;
  }
  return w;
}

std::string word_str(const Word& w) {
  if (w.empty()) return "e";
  std::string out;
  bool dotted = false;
  for (Letter a : w)
    if (a > 9) dotted = true;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (dotted && i > 0) out += '.';
    out += std::to_string(w[i]);
  }
  return out;
}

}  // namespace sigconf
