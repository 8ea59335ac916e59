#include "hihomog/multiindex.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace hihomog {

namespace {

void require_same_dim(const MultiIndex& a, const MultiIndex& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("multiindex dimension mismatch: " + a.str() +
                                " vs " + b.str());
  }
}

std::int64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
  }
  return r;
}

}  // namespace

MultiIndex::MultiIndex(std::vector<int> exponents) : exp_(std::move(exponents)) {
  for (int e : exp_) {
    if (e < 0) throw std::invalid_argument("multiindex entries must be nonnegative");
  }
}

MultiIndex::MultiIndex(std::initializer_list<int> exponents)
    : MultiIndex(std::vector<int>(exponents)) {}

MultiIndex MultiIndex::zero(int dim) {
  return MultiIndex(std::vector<int>(static_cast<std::size_t>(dim), 0));
}

MultiIndex MultiIndex::unit(int dim, int axis) {
  std::vector<int> e(static_cast<std::size_t>(dim), 0);
  e.at(static_cast<std::size_t>(axis)) = 1;
  return MultiIndex(std::move(e));
}

int MultiIndex::order() const {
  return std::accumulate(exp_.begin(), exp_.end(), 0);
}

MultiIndex MultiIndex::plus(const MultiIndex& other) const {
  require_same_dim(*this, other);
  std::vector<int> e(exp_);
  for (std::size_t i = 0; i < e.size(); ++i) e[i] += other.exp_[i];
  return MultiIndex(std::move(e));
}

MultiIndex MultiIndex::minus(const MultiIndex& other) const {
  require_same_dim(*this, other);
  std::vector<int> e(exp_);
  for (std::size_t i = 0; i < e.size(); ++i) {
    e[i] -= other.exp_[i];
    if (e[i] < 0) {
      throw std::invalid_argument("multiindex subtraction " + str() + " - " +
                                  other.str() + " leaves a negative entry");
    }
  }
  return MultiIndex(std::move(e));
}

bool MultiIndex::operator<(const MultiIndex& other) const {
  return std::lexicographical_compare(exp_.begin(), exp_.end(),
                                      other.exp_.begin(), other.exp_.end());
}

std::string MultiIndex::str() const {
  std::string s = "(";
  for (std::size_t i = 0; i < exp_.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(exp_[i]);
  }
  return s + ")";
}

IndexOrder compare(const MultiIndex& gamma, const MultiIndex& alpha) {
  require_same_dim(gamma, alpha);
  bool below = true, above = true, strict_below = false, strict_above = false;
  for (int i = 0; i < gamma.dim(); ++i) {
    if (gamma[i] < alpha[i]) {
      above = false;
      strict_below = true;
    } else if (gamma[i] > alpha[i]) {
      below = false;
      strict_above = true;
    }
  }
  if (below && !strict_below) return IndexOrder::Equal;
  if (below) return IndexOrder::Less;
  if (above && strict_above) return IndexOrder::Greater;
  return IndexOrder::Incomparable;
}

bool leq(const MultiIndex& gamma, const MultiIndex& alpha) {
  IndexOrder o = compare(gamma, alpha);
  return o == IndexOrder::Less || o == IndexOrder::Equal;
}

bool less(const MultiIndex& gamma, const MultiIndex& alpha) {
  return compare(gamma, alpha) == IndexOrder::Less;
}

std::vector<MultiIndex> enumerate_multiindices(int m, int d) {
  if (m < 0 || d < 1) {
    throw std::invalid_argument("enumerate_multiindices requires m >= 0, d >= 1");
  }
  std::vector<MultiIndex> out;
  std::vector<int> cur(static_cast<std::size_t>(d), 0);
  // Depth-first fill in lexicographic order: entry i takes values 0..rest,
  // the last entry absorbs the remainder.
  auto rec = [&](auto&& self, int axis, int rest) -> void {
    if (axis == d - 1) {
      cur[static_cast<std::size_t>(axis)] = rest;
      out.emplace_back(cur);
      return;
    }
    for (int v = 0; v <= rest; ++v) {
      cur[static_cast<std::size_t>(axis)] = v;
      self(self, axis + 1, rest - v);
    }
  };
  rec(rec, 0, m);
  return out;
}

std::int64_t multiindex_count(int m, int d) {
  return binomial(m + d - 1, d - 1);
}

std::int64_t leibniz_coefficient(const MultiIndex& alpha, const MultiIndex& gamma) {
  if (!leq(gamma, alpha)) {
    throw std::invalid_argument("leibniz_coefficient requires gamma <= alpha, got " +
                                gamma.str() + " vs " + alpha.str());
  }
  std::int64_t c = 1;
  for (int i = 0; i < alpha.dim(); ++i) c *= binomial(alpha[i], gamma[i]);
  return c;
}

std::vector<MultiIndex> lower_set(const MultiIndex& alpha) {
  std::vector<MultiIndex> out;
  std::vector<int> cur(static_cast<std::size_t>(alpha.dim()), 0);
  auto rec = [&](auto&& self, int axis) -> void {
    if (axis == alpha.dim()) {
      out.emplace_back(cur);
      return;
    }
    for (int v = 0; v <= alpha[axis]; ++v) {
      cur[static_cast<std::size_t>(axis)] = v;
      self(self, axis + 1);
    }
  };
  rec(rec, 0);
  std::sort(out.begin(), out.end());
  return out;
}

IndexBasis::IndexBasis(int m, int d, int n)
    : m_(m), d_(d), n_(n), list_(enumerate_multiindices(m, d)) {
  if (n < 1) throw std::invalid_argument("IndexBasis requires n >= 1");
}

int IndexBasis::position(const MultiIndex& alpha) const {
  auto it = std::lower_bound(list_.begin(), list_.end(), alpha);
  if (it == list_.end() || !(*it == alpha)) return -1;
  return static_cast<int>(it - list_.begin());
}

}  // namespace hihomog
