#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hihomog {

// Exponent vector alpha in Z^d_{>=0}, indexing the partial derivative
// D^alpha = D_1^{alpha_1} ... D_d^{alpha_d} of order |alpha| = sum alpha_i.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> exponents);
  MultiIndex(std::initializer_list<int> exponents);

  static MultiIndex zero(int dim);
  static MultiIndex unit(int dim, int axis);  // e_axis

  int dim() const { return static_cast<int>(exp_.size()); }
  int order() const;
  int operator[](int i) const { return exp_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& exponents() const { return exp_; }

  MultiIndex plus(const MultiIndex& other) const;
  // Componentwise difference; requires other <= *this.
  MultiIndex minus(const MultiIndex& other) const;

  bool operator==(const MultiIndex&) const = default;
  // Lexicographic order on the exponent vector; the canonical total order
  // used for every tensor enumeration.
  bool operator<(const MultiIndex& other) const;

  std::string str() const;

 private:
  std::vector<int> exp_;
};

enum class IndexOrder { Equal, Less, Greater, Incomparable };

// Componentwise partial order of gamma against alpha. Less means
// gamma_i <= alpha_i everywhere with strict inequality in at least one slot.
// Throws std::invalid_argument on dimension mismatch.
IndexOrder compare(const MultiIndex& gamma, const MultiIndex& alpha);

bool leq(const MultiIndex& gamma, const MultiIndex& alpha);
bool less(const MultiIndex& gamma, const MultiIndex& alpha);

// All multiindices with |alpha| = m in dimension d, lexicographically
// sorted, no duplicates. Count is the multiset coefficient C(m+d-1, d-1).
std::vector<MultiIndex> enumerate_multiindices(int m, int d);

std::int64_t multiindex_count(int m, int d);

// The constant c_{alpha,gamma} = prod_i binom(alpha_i, gamma_i) in the
// product rule D^alpha(w v) = sum_{gamma<=alpha} c_{alpha,gamma} D^gamma w
// D^{alpha-gamma} v; c_{alpha,0} = c_{alpha,alpha} = 1. Exact integer
// arithmetic. Throws if gamma is not <= alpha.
std::int64_t leibniz_coefficient(const MultiIndex& alpha, const MultiIndex& gamma);

// {gamma : gamma <= alpha}, lexicographically sorted.
std::vector<MultiIndex> lower_set(const MultiIndex& alpha);

// Enumeration basis shared by every array indexed over (component j,
// multiindex of order m): fixes d, m, the system size n and the canonical
// order of the multiindex list.
class IndexBasis {
 public:
  IndexBasis() = default;
  IndexBasis(int m, int d, int n);

  int m() const { return m_; }
  int dim() const { return d_; }
  int components() const { return n_; }
  // Number of multiindices of order m (the paper-level count written m-bar).
  int size() const { return static_cast<int>(list_.size()); }
  const MultiIndex& at(int slot) const { return list_[static_cast<std::size_t>(slot)]; }
  const std::vector<MultiIndex>& list() const { return list_; }
  // Slot of alpha in the canonical order, or -1 if |alpha| != m.
  int position(const MultiIndex& alpha) const;

  bool operator==(const IndexBasis&) const = default;

 private:
  int m_ = 0, d_ = 0, n_ = 0;
  std::vector<MultiIndex> list_;
};

}  // namespace hihomog
