#include "sigconf/shuffle.hpp"

#include <algorithm>
#include <map>

#include "sigconf/errors.hpp"

namespace sigconf {

namespace {

void shuffle_rec(std::span<const Letter> u, std::span<const Letter> v, Word& prefix,
                 std::vector<Word>& out) {
  if (u.empty() || v.empty()) {
    Word w = prefix;
    w.insert(w.end(), u.begin(), u.end());
    w.insert(w.end(), v.begin(), v.end());
    out.push_back(std::move(w));
    return;
  }
  prefix.push_back(u[0]);
  shuffle_rec(u.subspan(1), v, prefix, out);
  prefix.back() = v[0];
  shuffle_rec(u, v.subspan(1), prefix, out);
  prefix.pop_back();
}

}  // namespace

std::vector<Word> shuffle_words(const Word& u, const Word& v) {
  std::vector<Word> out;
  Word prefix;
  prefix.reserve(u.size() + v.size());
  shuffle_rec(u, v, prefix, out);
  return out;
}

std::vector<std::pair<std::size_t, double>> shuffle_product(const Word& u, const Word& v,
                                                            std::size_t d) {
  std::map<std::size_t, double> acc;
  for (const Word& w : shuffle_words(u, v)) acc[word_index(w, d)] += 1.0;
  return {acc.begin(), acc.end()};
}

double shuffle_pairing(const Word& u, const Word& v, std::span<const double> t, std::size_t d) {
  if (t.size() < sig_dim(d, u.size() + v.size()))
    throw ConfigError("shuffle_pairing: tensor truncated below |u| + |v|");
  double sum = 0.0;
  for (const auto& [idx, coeff] : shuffle_product(u, v, d)) sum += coeff * t[idx];
  return sum;
}

std::vector<double> shuffle_apply(std::span<const double> f, std::span<const double> g,
                                  std::size_t d, std::size_t order) {
  const std::size_t width = sig_dim(d, order);
  if (f.size() != width || g.size() != width)
    throw ConfigError("shuffle_apply: operand size mismatch");
  std::vector<double> out(sig_dim(d, 2 * order), 0.0);
  for (std::size_t i = 0; i < width; ++i) {
    if (f[i] == 0.0) continue;
    const Word u = word_at(i, d);
    for (std::size_t j = 0; j < width; ++j) {
      if (g[j] == 0.0) continue;
      const double fg = f[i] * g[j];
      for (const auto& [idx, coeff] : shuffle_product(u, word_at(j, d), d))
        out[idx] += fg * coeff;
    }
  }
  return out;
}

ShuffleTable::ShuffleTable(std::size_t d, std::size_t order)
    : d_(d), order_(order), width_(sig_dim(d, order)) {
  pairs_.resize(width_ * width_);
  for (std::size_t i = 0; i < width_; ++i) {
    const Word u = word_at(i, d);
    for (std::size_t j = i; j < width_; ++j) {
      pairs_[i * width_ + j] = shuffle_product(u, word_at(j, d), d);
      if (j != i) pairs_[j * width_ + i] = pairs_[i * width_ + j];  // commutative
    }
  }
}

const std::vector<std::pair<std::size_t, double>>& ShuffleTable::expansion(std::size_t i,
                                                                           std::size_t j) const {
  if (i >= width_ || j >= width_) throw ConfigError("ShuffleTable: word index out of range");
  return pairs_[i * width_ + j];
}

}  // namespace sigconf
