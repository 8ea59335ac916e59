#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hihomog/coefficients.hpp"
#include "test_oracles.hpp"

using namespace hihomog;

TEST_SUITE("coefficients") {
  TEST_CASE("adjoint is a conjugating involution") {
    CoefficientArray A = builtin_coefficients("nonsym", {{"d", 1}, {"m", 1}, {"rho", 0.3}});
    CoefficientArray Astar = adjoint(A);
    CoefficientArray back = adjoint(Astar);
    for (int a = 0; a < A.basis().size(); ++a) {
      for (int b = 0; b < A.basis().size(); ++b) {
        REQUIRE(A.has_block(a, b) == back.has_block(a, b));
        if (!A.has_block(a, b)) continue;
        for (int j = 0; j < 2; ++j) {
          for (int k = 0; k < 2; ++k) {
            CHECK(norm_l2(back.block(a, b).at(j, k) - A.block(a, b).at(j, k)) < 1e-15);
          }
        }
      }
    }
    CHECK(Astar.lambda1() == A.lambda1());  // the bound is preserved exactly

    // single-entry example: c e^{2 pi i y} transposes and conjugates
    CoefficientArray C = builtin_coefficients("complex", {{"d", 1}, {"m", 1}, {"rho", 0.4}});
    CoefficientArray Cstar = adjoint(C);
    int kp[1] = {1}, km[1] = {-1};
    CHECK(std::abs(C.block(0, 0).at(0, 0).coefficient(kp) - Complex{0.4, 0.0}) < 1e-15);
    CHECK(std::abs(Cstar.block(0, 0).at(0, 0).coefficient(km) - Complex{0.4, 0.0}) < 1e-15);
    CHECK(std::abs(Cstar.block(0, 0).at(0, 0).coefficient(kp)) < 1e-15);
  }

  TEST_CASE("real families have conjugate-symmetric spectra") {
    CHECK(builtin_coefficients("harmonic", {{"m", 2}}).is_real());
    CHECK(builtin_coefficients("separable", {{"m", 2}}).is_real());
    CHECK(builtin_coefficients("skew", {{"m", 2}}).is_real());
    CHECK_FALSE(builtin_coefficients("complex", {{"d", 1}, {"m", 1}}).is_real());
  }

  TEST_CASE("coercivity estimate: identity form") {
    CoefficientArray A = builtin_coefficients(
        "constant", {{"d", 2}, {"m", 2}, {"n", 1}, {"value_re", 1.0}});
    CoercivityEstimate est = check_coercivity(A, 6);
    REQUIRE(est.positive);
    CHECK(est.value == doctest::Approx(1.0).epsilon(1e-10));
  }

  TEST_CASE("coercivity estimate: harmonic profile approaches min a = 1/3") {
    CoefficientArray A = builtin_coefficients("harmonic", {{"m", 1}});
    CoercivityEstimate est = check_coercivity(A, 48);
    REQUIRE(est.positive);
    CHECK(est.value >= 1.0 / 3.0 - 1e-12);  // pointwise lower bound
    CHECK(est.value <= 1.0 / 3.0 + 0.05);
    CoercivityEstimate coarse = check_coercivity(A, 16);
    CHECK(coarse.value >= est.value - 1e-12);  // estimate decreases with cutoff
  }

  TEST_CASE("coercivity estimate: skew perturbations have unit Hermitian part") {
    // identity + skew coupling: the skew part has no Hermitian contribution
    CoefficientArray A = builtin_coefficients("skew", {{"m", 2}, {"rho", 0.3}});
    CoercivityEstimate est = check_coercivity(A, 6);
    REQUIRE(est.positive);
    CHECK(est.value == doctest::Approx(1.0).epsilon(1e-8));

    CoefficientArray B = builtin_coefficients("nonsym", {{"d", 1}, {"m", 2}, {"rho", 0.3}});
    CoercivityEstimate estb = check_coercivity(B, 8);
    REQUIRE(estb.positive);
    CHECK(estb.value >= 0.5);
    CHECK(estb.value == doctest::Approx(1.0).epsilon(1e-8));
  }

  TEST_CASE("builtin catalogue and validation") {
    CHECK_THROWS_AS(builtin_coefficients("unknown"), std::invalid_argument);
    CHECK_THROWS_AS(builtin_coefficients("nonsym", {{"rho", 0.7}}), std::invalid_argument);
    CHECK_THROWS_AS(builtin_coefficients("complex", {{"rho", -0.9}}), std::invalid_argument);
    CHECK_THROWS_AS(builtin_coefficients("separable", {{"rho", 0.5}}), std::invalid_argument);
    CHECK_THROWS_AS(builtin_coefficients_spec("separable:rho"), std::invalid_argument);

    CoefficientArray H = builtin_coefficients_spec("harmonic:m=2,band=24");
    CHECK(H.basis().m() == 2);
    CHECK(H.lambda0() == doctest::Approx(1.0 / 3.0));
    // the truncated profile evaluates to 1/(2+cos) pointwise
    auto oracle = [](double y) { return 1.0 / (2.0 + std::cos(2.0 * std::numbers::pi * y)); };
    std::vector<int> dims{97};
    auto samples = sample_grid(H.block(0, 0).at(0, 0), dims);
    for (int i = 0; i < 97; ++i) {
      CHECK(std::abs(samples[static_cast<std::size_t>(i)] -
                     Complex{oracle(i / 97.0), 0.0}) < 1e-12);
    }

    // L-infinity estimate respects the declared bound for every family
    for (const char* spec :
         {"harmonic:m=1", "separable:m=2", "nonsym:m=2", "complex:d=1,m=2", "skew:m=2"}) {
      CoefficientArray A = builtin_coefficients_spec(spec);
      CHECK(A.linf_estimate() <= A.lambda1() * (1.0 + 1e-6));
    }
  }

  TEST_CASE("separable family min/max from quadrature") {
    CoefficientArray A = builtin_coefficients("separable", {{"m", 1}, {"rho", 0.25}});
    // factor 1 + 0.5 cos: min 0.5, max 1.5; product squares them
    CHECK(A.lambda0() == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(A.lambda1() == doctest::Approx(2.25).epsilon(1e-6));
  }
}
