#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hihomog/cell.hpp"
#include "test_oracles.hpp"

using namespace hihomog;

namespace {

constexpr double kPi = std::numbers::pi;

// mean-zero antiderivative chain of the harmonic corrector: for
// a = 1/(2 + cos 2 pi y), a (1 + N^(m)) = 1/2, so N^(m) = cos(2 pi y)/2.
SpectralField harmonic_corrector_closed_form(int m) {
  SpectralField N(ModeBox::uniform(1, 1));
  int kp[1] = {1}, km[1] = {-1};
  // N^(m) has coefficients 1/4 at k = +-1; divide by (2 pi i k)^m
  Complex cp = Complex{0.25, 0.0} / testing_oracles::pm(1, m);
  Complex cm = Complex{0.25, 0.0} / testing_oracles::pm(-1, m);
  N.set_coefficient(kp, cp);
  N.set_coefficient(km, cm);
  return N;
}

}  // namespace

TEST_SUITE("cell") {
  TEST_CASE("constant coefficients have zero correctors and Ahat = A") {
    CoefficientArray A = builtin_coefficients(
        "constant", {{"d", 2}, {"m", 2}, {"n", 2}, {"value_re", 1.5}});
    CellSolveOptions opt;
    opt.cutoff = {4, 4};
    CellData cell = solve_all(A, opt);
    for (const auto& N : cell.correctors) CHECK(norm_l2(N) == 0.0);
    for (const auto& g : cell.flux) CHECK(norm_l2(g) == 0.0);
    for (int a = 0; a < cell.basis.size(); ++a) {
      for (int b = 0; b < cell.basis.size(); ++b) {
        Eigen::MatrixXcd expect = Eigen::MatrixXcd::Zero(2, 2);
        if (a == b) expect = 1.5 * Eigen::MatrixXcd::Identity(2, 2);
        CHECK((cell.effective.block(a, b) - expect).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
    for (const auto& N : cell.adjoint_correctors) CHECK(norm_l2(N) == 0.0);
  }

  TEST_CASE("harmonic family: closed-form correctors and Ahat = 1/2") {
    for (int m : {1, 2}) {
      CoefficientArray A = builtin_coefficients("harmonic", {{"m", m}});
      CellData cell = solve_all(A, {});
      CHECK(std::abs(cell.effective.block(0, 0)(0, 0) - Complex{0.5, 0.0}) < 1e-8);

      SpectralField expect = harmonic_corrector_closed_form(m);
      SpectralField got = cell.corrector(0, 0)[0];
      CHECK(norm_l2(got - resized(expect, got.box())) < 1e-8);

      // harmonic mean oracle by quadrature: <1/a>^{-1}
      double mean_inv = testing_oracles::periodic_mean(
          [](double y) { return 2.0 + std::cos(2.0 * kPi * y); });
      CHECK(std::abs(cell.effective.block(0, 0)(0, 0) - Complex{1.0 / mean_inv, 0.0}) < 1e-8);

      // the 1D flux is constant: g vanishes
      for (const auto& g : cell.flux) CHECK(norm_l2(g) < 1e-8);

      // starred objects match the unstarred ones (real symmetric scalar)
      for (int gidx = 0; gidx < cell.basis.size(); ++gidx) {
        CHECK(norm_l2(cell.adjoint_corrector(0, gidx) - cell.corrector(0, gidx)) < 1e-9);
      }
    }
  }

  TEST_CASE("dense Galerkin oracle agrees with the matrix-free cell solve") {
    CoefficientArray A = builtin_coefficients("harmonic", {{"m", 2}, {"band", 6}});
    CellSolveOptions opt;
    opt.cutoff = {8};
    CellData cell = solve_correctors(A, opt);

    auto oracle = testing_oracles::dense_cell_solve(A.block(0, 0).at(0, 0), 2, 8);
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < oracle.modes.size(); ++i) {
      int kk[1] = {oracle.modes[i]};
      err += std::norm(cell.corrector(0, 0)[0].coefficient(kk) -
                       oracle.solution(static_cast<Eigen::Index>(i)));
      scale += std::norm(oracle.solution(static_cast<Eigen::Index>(i)));
    }
    CHECK(std::sqrt(err) < 1e-8 * std::sqrt(scale));

    // complex non-self-adjoint family through the same oracle
    CoefficientArray C = builtin_coefficients("complex", {{"d", 1}, {"m", 2}, {"rho", 0.4}});
    CellSolveOptions copt;
    copt.cutoff = {8};
    CellData ccell = solve_correctors(C, copt);
    auto coracle = testing_oracles::dense_cell_solve(C.block(0, 0).at(0, 0), 2, 8);
    err = scale = 0.0;
    for (std::size_t i = 0; i < coracle.modes.size(); ++i) {
      int kk[1] = {coracle.modes[i]};
      err += std::norm(ccell.corrector(0, 0)[0].coefficient(kk) -
                       coracle.solution(static_cast<Eigen::Index>(i)));
      scale += std::norm(coracle.solution(static_cast<Eigen::Index>(i)));
    }
    CHECK(std::sqrt(err) < 1e-8 * std::sqrt(scale));
  }

  TEST_CASE("mean-zero and energy identity") {
    CoefficientArray A = builtin_coefficients("separable", {{"m", 2}, {"rho", 0.25}});
    CellSolveOptions opt;
    opt.cutoff = {10, 10};
    CellData cell = solve_all(A, opt);
    for (const auto& N : cell.correctors) {
      for (int j = 0; j < N.components(); ++j) CHECK(std::abs(N[j].mean()) == 0.0);
    }
    for (const auto& g : cell.flux) {
      for (int j = 0; j < g.components(); ++j) CHECK(std::abs(g[j].mean()) == 0.0);
    }
    for (const auto& rec : cell.records) {
      CHECK(rec.krylov.converged);
      CHECK(std::isfinite(rec.grad_norm));
    }
  }

  TEST_CASE("separable m=1 effective tensor matches the harmonic-mean formula") {
    double rho = 0.25;
    CoefficientArray A = builtin_coefficients("separable", {{"m", 1}, {"rho", rho}});
    CellSolveOptions opt;
    opt.cutoff = {12, 12};
    CellData cell = solve_correctors(A, opt);
    EffectiveTensor Ahat = effective_tensor(A, cell);

    auto factor = [&](double t) { return 1.0 + 2.0 * rho * std::cos(2.0 * kPi * t); };
    double mean_f = testing_oracles::periodic_mean(factor);
    double harm_f = 1.0 / testing_oracles::periodic_mean([&](double t) { return 1.0 / factor(t); });
    // Ahat = diag(<f2> harm(f1), <f1> harm(f2)) for a = f1(y1) f2(y2)
    int a10 = cell.basis.position(MultiIndex{1, 0});
    int a01 = cell.basis.position(MultiIndex{0, 1});
    CHECK(std::abs(Ahat.block(a10, a10)(0, 0) - Complex{mean_f * harm_f, 0.0}) < 1e-8);
    CHECK(std::abs(Ahat.block(a01, a01)(0, 0) - Complex{mean_f * harm_f, 0.0}) < 1e-8);
    CHECK(std::abs(Ahat.block(a10, a01)(0, 0)) < 1e-9);

    // cutoff doubling self-consistency
    CellSolveOptions opt2;
    opt2.cutoff = {24, 24};
    CellData cell2 = solve_correctors(A, opt2);
    EffectiveTensor Ahat2 = effective_tensor(A, cell2);
    CHECK(distance(Ahat, Ahat2) <= 10.0 * 1e-10);
  }

  TEST_CASE("flux is solenoidal and mean free in 2D") {
    CoefficientArray A = builtin_coefficients("separable", {{"m", 2}, {"rho", 0.25}});
    CellSolveOptions opt;
    opt.cutoff = {16, 16};
    CellData cell = solve_all(A, opt);
    for (int b = 0; b < cell.basis.size(); ++b) {
      FieldArray col = cell.flux_column(0, b);
      CHECK(divergence_residual(col) < 1e-9);
    }
    SymbolCheck sym = check_symbol_positivity(cell.effective, A.lambda0(), 100, 42);
    CHECK(sym.passed);
  }

  TEST_CASE("skew family: closed-form correctors and effective tensor") {
    double rho = 0.6;
    CoefficientArray A = builtin_coefficients("skew", {{"m", 2}, {"rho", rho}});
    CellData cell = solve_all(A, {});
    const IndexBasis& basis = cell.basis;
    int p = basis.position(MultiIndex{1, 1});
    int q = basis.position(MultiIndex{2, 0});
    int r = basis.position(MultiIndex{0, 2});

    // N_{(1,1)} = rho (-cos(2 pi y1)/(4 pi^2) - sin(4 pi y1)/(16 pi^2)), others 0
    SpectralField expect(ModeBox(std::vector<int>{2, 0}));
    {
      int k1[2] = {1, 0}, k1m[2] = {-1, 0}, k2[2] = {2, 0}, k2m[2] = {-2, 0};
      expect.set_coefficient(k1, Complex{-rho / (8.0 * kPi * kPi), 0.0});
      expect.set_coefficient(k1m, Complex{-rho / (8.0 * kPi * kPi), 0.0});
      // -rho sin(4 pi y)/(16 pi^2): coefficient at k=2 is rho i/(32 pi^2)
      expect.set_coefficient(k2, Complex{0.0, rho / (32.0 * kPi * kPi)});
      expect.set_coefficient(k2m, Complex{0.0, -rho / (32.0 * kPi * kPi)});
    }
    CHECK(norm_l2(cell.corrector(0, p)[0] - resized(expect, cell.box)) < 1e-9);
    CHECK(norm_l2(cell.corrector(0, q)) < 1e-10);
    CHECK(norm_l2(cell.corrector(0, r)) < 1e-10);

    // Ahat = I + rho^2 <c^2> at the (1,1) slot; <c^2> = 1
    CHECK(std::abs(cell.effective.block(p, p)(0, 0) - Complex{1.0 + rho * rho, 0.0}) < 1e-9);
    CHECK(std::abs(cell.effective.block(q, q)(0, 0) - Complex{1.0, 0.0}) < 1e-10);
    CHECK(std::abs(cell.effective.block(p, q)(0, 0)) < 1e-10);

    // adjoint effective tensor equals the adjoint of the effective tensor
    CHECK(distance(cell.adjoint_effective, cell.effective.adjointed()) < 1e-9);

    // g_{pp} = rho^2 (c^2 - <c^2>), g_{pq} = rho c, all other columns zero
    FieldArray colp = cell.flux_column(0, p);
    CHECK(norm_l2(colp.at(q)) < 1e-10);
    CHECK(norm_l2(colp.at(r)) < 1e-10);
    int k1[2] = {1, 0};
    CHECK(std::abs(cell.flux_field(0, p, q)[0].coefficient(k1) - Complex{0.5 * rho, 0.0}) <
          1e-9);
  }

  TEST_CASE("adjoint commutation for the effective tensor across families") {
    for (const char* spec : {"harmonic:m=1", "harmonic:m=2", "complex:d=1,m=2,rho=0.4",
                             "nonsym:d=1,m=2,rho=0.3"}) {
      CoefficientArray A = builtin_coefficients_spec(spec);
      CellData cell = solve_all(A, {});
      CHECK(distance(cell.adjoint_effective, cell.effective.adjointed()) < 1e-8);
    }
  }

  TEST_CASE("cutoff below the coefficient band is rejected") {
    CoefficientArray A = builtin_coefficients("harmonic", {{"m", 1}, {"band", 8}});
    CellSolveOptions opt;
    opt.cutoff = {4};
    CHECK_THROWS_AS(solve_correctors(A, opt), std::invalid_argument);
  }
}
