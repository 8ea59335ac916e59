#include <doctest.h>

#include <map>
#include <stdexcept>
#include <random>

#include "hihomog/multiindex.hpp"

using namespace hihomog;

namespace {

// Exact multivariate monomial calculus over the integers; the independent
// oracle for the product rule.
using Monomial = std::pair<std::int64_t, std::vector<int>>;  // coeff, exponents

Monomial diff(const Monomial& w, const MultiIndex& alpha) {
  Monomial out = w;
  for (int i = 0; i < alpha.dim(); ++i) {
    for (int r = 0; r < alpha[i]; ++r) {
      if (out.second[static_cast<std::size_t>(i)] == 0) {
        out.first = 0;
        return out;
      }
      out.first *= out.second[static_cast<std::size_t>(i)];
      out.second[static_cast<std::size_t>(i)] -= 1;
    }
  }
  return out;
}

Monomial mul(const Monomial& w, const Monomial& v) {
  Monomial out;
  out.first = w.first * v.first;
  out.second = w.second;
  for (std::size_t i = 0; i < out.second.size(); ++i) out.second[i] += v.second[i];
  return out;
}

}  // namespace

TEST_SUITE("multiindex") {
  TEST_CASE("enumeration matches stars-and-bars") {
    auto list = enumerate_multiindices(2, 2);
    REQUIRE(list.size() == 3);
    CHECK(list[0] == MultiIndex{0, 2});
    CHECK(list[1] == MultiIndex{1, 1});
    CHECK(list[2] == MultiIndex{2, 0});

    CHECK(enumerate_multiindices(0, 3) == std::vector<MultiIndex>{MultiIndex{0, 0, 0}});
    CHECK(enumerate_multiindices(3, 2).size() == 4);
    CHECK(multiindex_count(3, 2) == 4);

    for (int m = 0; m <= 4; ++m) {
      for (int d = 1; d <= 3; ++d) {
        auto l = enumerate_multiindices(m, d);
        CHECK(static_cast<std::int64_t>(l.size()) == multiindex_count(m, d));
        for (std::size_t i = 0; i + 1 < l.size(); ++i) CHECK(l[i] < l[i + 1]);
        CHECK(l == enumerate_multiindices(m, d));  // order stable across runs
      }
    }
  }

  TEST_CASE("componentwise comparison") {
    CHECK(compare(MultiIndex{1, 0}, MultiIndex{2, 0}) == IndexOrder::Less);
    CHECK(compare(MultiIndex{1, 1}, MultiIndex{2, 0}) == IndexOrder::Incomparable);
    CHECK(compare(MultiIndex{2, 0}, MultiIndex{2, 0}) == IndexOrder::Equal);
    CHECK(compare(MultiIndex{2, 1}, MultiIndex{2, 0}) == IndexOrder::Greater);
    CHECK(leq(MultiIndex{1, 0}, MultiIndex{2, 0}));
    CHECK_FALSE(less(MultiIndex{2, 0}, MultiIndex{2, 0}));
    CHECK_THROWS_AS(compare(MultiIndex{1}, MultiIndex{1, 0}), std::invalid_argument);
  }

  TEST_CASE("leibniz coefficients") {
    CHECK(leibniz_coefficient(MultiIndex{2, 0}, MultiIndex{1, 0}) == 2);
    CHECK(leibniz_coefficient(MultiIndex{2, 1}, MultiIndex{1, 1}) == 2);
    for (const auto& alpha : enumerate_multiindices(3, 3)) {
      CHECK(leibniz_coefficient(alpha, MultiIndex::zero(3)) == 1);
      CHECK(leibniz_coefficient(alpha, alpha) == 1);
    }
    CHECK_THROWS_AS(leibniz_coefficient(MultiIndex{1, 0}, MultiIndex{0, 1}),
                    std::invalid_argument);
  }

  TEST_CASE("product rule is exact on random monomials") {
    std::mt19937_64 rng(20240811);
    std::uniform_int_distribution<int> deg(0, 4);
    std::uniform_int_distribution<std::int64_t> cf(-5, 5);
    const int d = 2;
    for (int trial = 0; trial < 200; ++trial) {
      Monomial w{cf(rng), {deg(rng), deg(rng)}};
      Monomial v{cf(rng), {deg(rng), deg(rng)}};
      for (int order = 0; order <= 3; ++order) {
        for (const auto& alpha : enumerate_multiindices(order, d)) {
          Monomial lhs = diff(mul(w, v), alpha);
          // sum over gamma <= alpha of c * D^gamma w * D^{alpha-gamma} v
          std::map<std::vector<int>, std::int64_t> acc;
          for (const auto& gamma : lower_set(alpha)) {
            Monomial t = mul(diff(w, gamma), diff(v, alpha.minus(gamma)));
            t.first *= leibniz_coefficient(alpha, gamma);
            if (t.first != 0) acc[t.second] += t.first;
          }
          std::int64_t rhs = 0;
          if (lhs.first != 0) {
            auto it = acc.find(lhs.second);
            rhs = it == acc.end() ? 0 : it->second;
            acc.erase(lhs.second);
          }
          CHECK(lhs.first == rhs);
          for (const auto& [e, c] : acc) CHECK(c == 0);
        }
      }
    }
  }

  TEST_CASE("lower set partitions by the split used in the expansions") {
    // {gamma <= alpha} = {alpha} + {gamma < alpha, |gamma| = |alpha|-1} + rest
    for (const auto& alpha : enumerate_multiindices(3, 2)) {
      auto all = lower_set(alpha);
      int equal = 0, one_below = 0, rest = 0;
      for (const auto& g : all) {
        if (g == alpha) {
          ++equal;
        } else if (g.order() == alpha.order() - 1) {
          CHECK(less(g, alpha));
          ++one_below;
        } else {
          ++rest;
        }
      }
      CHECK(equal == 1);
      CHECK(equal + one_below + rest == static_cast<int>(all.size()));
      // the middle tier is exactly one index per nonzero slot
      int nonzero = 0;
      for (int i = 0; i < alpha.dim(); ++i) nonzero += alpha[i] > 0 ? 1 : 0;
      CHECK(one_below == nonzero);
    }
  }

  TEST_CASE("index basis") {
    IndexBasis basis(2, 2, 3);
    CHECK(basis.size() == 3);
    CHECK(basis.components() == 3);
    CHECK(basis.position(MultiIndex{1, 1}) == 1);
    CHECK(basis.position(MultiIndex{3, 0}) == -1);
  }
}
