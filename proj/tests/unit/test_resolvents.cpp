#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hihomog/harness.hpp"
#include "hihomog/resolvents.hpp"
#include "test_oracles.hpp"

using namespace hihomog;

namespace {

constexpr double kPi = std::numbers::pi;

VectorField single_mode_f(int d, std::vector<int> k) {
  VectorField f(1, ModeBox(std::vector<int>(k.size(), 3)));
  f[0].set_coefficient(k, Complex{1.0, 0.0});
  return f;
}

}  // namespace

TEST_SUITE("resolvents") {
  TEST_CASE("homogenized resolvent is a per-frequency multiplier") {
    // identity tensor, d=1, m=1: u = f / (1 + 4 pi^2) at |k| = 1
    CoefficientArray A = builtin_coefficients(
        "constant", {{"d", 1}, {"m", 1}, {"n", 1}, {"value_re", 1.0}});
    CellData cell = solve_all(A, {});
    HomogenizedOperator op(cell.effective);
    VectorField f = single_mode_f(1, {1});
    VectorField u = op.solve(f);
    int k1[1] = {1};
    CHECK(std::abs(u[0].coefficient(k1) - Complex{1.0 / (1.0 + 4.0 * kPi * kPi), 0.0}) <
          1e-13);
    // zero input, zero output; linearity holds exactly
    VectorField z(1, f.box());
    CHECK(norm_l2(op.solve(z)) == 0.0);
    VectorField two_f = Complex{2.0, 0.0} * f;
    CHECK(norm_l2(op.solve(two_f) - Complex{2.0, 0.0} * u) < 1e-15);

    // harmonic family: Ahat = 1/2, sigma(1) = 2 pi^2
    CoefficientArray H = builtin_coefficients("harmonic", {{"m", 1}});
    CellData hc = solve_all(H, {});
    HomogenizedOperator hop(hc.effective);
    VectorField hu = hop.solve(f);
    CHECK(std::abs(hu[0].coefficient(k1) - Complex{1.0 / (1.0 + 2.0 * kPi * kPi), 0.0}) <
          1e-9);
    CHECK(elliptic_ratio(hu, f, 1) > 0.0);
  }

  TEST_CASE("fine solve: constant coefficients reduce to the homogenized solve") {
    CoefficientArray A = builtin_coefficients(
        "constant", {{"d", 1}, {"m", 2}, {"n", 1}, {"value_re", 2.0}});
    CellData cell = solve_all(A, {});
    HomogenizedOperator op(cell.effective);
    VectorField f = build_forcing(default_forcing(1, 1), 1, 1);
    FineProblem p = FineProblem::make(A, 8, f, std::vector<int>{4});
    FineSolution sol = solve_fine(p);
    VectorField u = resized(op.solve(f), p.fine_box);
    CHECK(norm_l2(sol.u - u) < 1e-10);
    CHECK(sol.energy_ratio <= 1.0 + 1e-6);
  }

  TEST_CASE("fine solve agrees with the dense Galerkin oracle") {
    CoefficientArray A = builtin_coefficients("harmonic", {{"m", 1}, {"band", 6}});
    VectorField f = build_forcing(default_forcing(1, 1), 1, 1);
    const int K = 4;
    FineProblem p = FineProblem::make(A, K, f, std::vector<int>{2 * 6 + 3});
    FineSolution sol = solve_fine(p);

    std::vector<int> modes;
    Eigen::VectorXcd dense = testing_oracles::dense_fine_solve(
        A.block(0, 0).at(0, 0), 1, K, f[0], p.fine_box.cutoff()[0], modes);
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < modes.size(); ++i) {
      int kk[1] = {modes[i]};
      err += std::norm(sol.u[0].coefficient(kk) - dense(static_cast<Eigen::Index>(i)));
      scale += std::norm(dense(static_cast<Eigen::Index>(i)));
    }
    CHECK(std::sqrt(err) <= 1e-8 * std::sqrt(scale));

    // complex family too
    CoefficientArray C = builtin_coefficients("complex", {{"d", 1}, {"m", 2}, {"rho", 0.4}});
    FineProblem pc = FineProblem::make(C, K, f, std::vector<int>{8});
    FineSolution solc = solve_fine(pc);
    Eigen::VectorXcd densec = testing_oracles::dense_fine_solve(
        C.block(0, 0).at(0, 0), 2, K, f[0], pc.fine_box.cutoff()[0], modes);
    err = scale = 0.0;
    for (std::size_t i = 0; i < modes.size(); ++i) {
      int kk[1] = {modes[i]};
      err += std::norm(solc.u[0].coefficient(kk) - densec(static_cast<Eigen::Index>(i)));
      scale += std::norm(densec(static_cast<Eigen::Index>(i)));
    }
    CHECK(std::sqrt(err) <= 1e-8 * std::sqrt(scale));
  }

  TEST_CASE("duality of the fine resolvents") {
    // (h, (L_eps+I)^{-1} f) = ((L*_eps+I)^{-1} h, f)
    CoefficientArray A = builtin_coefficients("complex", {{"d", 1}, {"m", 2}, {"rho", 0.4}});
    CoefficientArray Astar = adjoint(A);
    VectorField f = build_forcing(default_forcing(1, 1), 1, 1);
    VectorField h(1, f.box());
    h[0].set_coefficient(std::vector<int>{2}, Complex{0.3, 0.4});
    h[0].set_coefficient(std::vector<int>{-1}, Complex{-0.2, 0.1});

    const int K = 8;
    FineProblem pf = FineProblem::make(A, K, f);
    FineProblem ph = FineProblem::make(Astar, K, h);
    FineSolution uf = solve_fine(pf);
    FineSolution vh = solve_fine(ph);
    Complex lhs = inner(resized(h, pf.fine_box), uf.u);
    Complex rhs = inner(vh.u, resized(f, ph.fine_box));
    CHECK(std::abs(lhs - rhs) <= 1e-9 * std::abs(lhs));
  }

  TEST_CASE("first-order approximation and corrector bounds") {
    CoefficientArray A = builtin_coefficients(
        "constant", {{"d", 1}, {"m", 2}, {"n", 1}, {"value_re", 1.0}});
    CellData cell = solve_all(A, {});
    HomogenizedOperator op(cell.effective);
    VectorField f = build_forcing(default_forcing(1, 1), 1, 1);
    VectorField u = op.solve(f);
    ModeBox fine = ModeBox::uniform(1, 64);

    // constant coefficients: u~ = S^eps u and the corrector vanishes
    VectorField ut = first_order_approx(cell, u, 8, fine);
    CHECK(norm_l2(ut - resized(steklov(u, 1.0 / 8), fine)) == 0.0);
    CorrectorResult corr = corrector_operator(cell, op, f, 8, fine);
    CHECK(norm_l2(corr.correction) == 0.0);

    VectorField zero_f(1, f.box());
    CorrectorResult corr0 = corrector_operator(cell, op, zero_f, 8, fine);
    CHECK(norm_l2(corr0.correction) == 0.0);

    // residual for constant coefficients is exactly the smoothing defect
    ResidualReport rep = residual_check(A, ut, resized(f, fine), 8);
    ResidualReport rep2 = residual_check(A, first_order_approx(cell, u, 16, fine),
                                         resized(f, fine), 16);
    CHECK(rep.residual_hneg == doctest::Approx(rep.steklov_defect_hneg).epsilon(1e-10));
    // and it decays at second order in eps
    double ratio = rep.residual_hneg / rep2.residual_hneg;
    CHECK(ratio > 3.0);

    // overflow of the rescaled corrector band is reported
    CoefficientArray H = builtin_coefficients("harmonic", {{"m", 2}});
    CellData hc = solve_all(H, {});
    CHECK_THROWS_AS(first_order_approx(hc, u, 8, ModeBox::uniform(1, 16)),
                    std::invalid_argument);
  }

  TEST_CASE("b coefficients: constant and closed-form skew oracle") {
    CoefficientArray C = builtin_coefficients(
        "constant", {{"d", 2}, {"m", 2}, {"n", 1}, {"value_re", 1.0}});
    CellSolveOptions copt;
    copt.cutoff = {2, 2};
    CellData ccell = solve_all(C, copt);
    BTensor Bc = b_coefficients(ccell);
    CHECK(Bc.scale() == 0.0);

    const double rho = 0.6;
    CoefficientArray A = builtin_coefficients("skew", {{"m", 2}, {"rho", rho}});
    CellData cell = solve_all(A, {});
    BTensor B = b_coefficients(cell);
    const IndexBasis& basis = cell.basis;
    int p = basis.position(MultiIndex{1, 1});
    // the single nonzero entry: alpha = beta = gamma = (1,1), mu = (1,0)
    double expected = -3.0 * rho * rho * rho / (8.0 * kPi);
    CHECK(std::abs(B.entry(p, p, p, 1)(0, 0) - Complex{expected, 0.0}) < 1e-9);
    // everything else is zero
    double off = 0.0;
    for (int a = 0; a < basis.size(); ++a) {
      for (int b = 0; b < basis.size(); ++b) {
        for (int g = 0; g < basis.size(); ++g) {
          for (int axis = 0; axis < 2; ++axis) {
            if (a == p && b == p && g == p && axis == 1) continue;
            if (!B.valid(a, axis)) continue;
            off = std::max(off, B.entry(a, b, g, axis).cwiseAbs().maxCoeff());
          }
        }
      }
    }
    CHECK(off < 1e-9);

    // tau(k) = i b (2 pi)^5 k1^2 k2^3
    MOperator M = assemble_M(B);
    int kk[2] = {1, 2};
    Complex tau = M.tau(kk)(0, 0);
    Complex tau_expected =
        Complex{0.0, 1.0} * expected * std::pow(2.0 * kPi, 5) * 1.0 * 8.0;
    CHECK(std::abs(tau - tau_expected) < 1e-6 * std::abs(tau_expected));
    CHECK(M.cancellation() > 1e-6);  // the gate opens for this family
  }

  TEST_CASE("symmetric scalar families cancel the M symbol") {
    for (const char* spec : {"harmonic:m=2", "separable:m=2,rho=0.25",
                             "complex:d=1,m=2,rho=0.4"}) {
      CoefficientArray A = builtin_coefficients_spec(spec);
      CellSolveOptions opt;
      if (A.basis().dim() == 2) opt.cutoff = {12, 12};
      CellData cell = solve_all(A, opt);
      MOperator M = assemble_M(b_coefficients(cell));
      CHECK(M.cancellation() < 1e-8);
    }
  }

  TEST_CASE("K1 application: zero M and the one-frequency hand oracle") {
    CoefficientArray A = builtin_coefficients("skew", {{"m", 2}, {"rho", 0.6}});
    CellData cell = solve_all(A, {});
    HomogenizedOperator op(cell.effective);
    BTensor B = b_coefficients(cell);
    MOperator M = assemble_M(B);

    VectorField f = single_mode_f(2, {1, 1});
    VectorField k1f = apply_K1(op, M, f);
    // by hand: sigma(1,1) = (2 pi)^4 (3 + rho^2);
    // tau(1,1) = i b (2 pi)^5; K1 f = tau / (sigma + 1)^2
    double rho = 0.6;
    double b = -3.0 * rho * rho * rho / (8.0 * kPi);
    double sigma = std::pow(2.0 * kPi, 4) * (3.0 + rho * rho);
    Complex expected = Complex{0.0, 1.0} * b * std::pow(2.0 * kPi, 5) /
                       ((sigma + 1.0) * (sigma + 1.0));
    int kk[2] = {1, 1};
    CHECK(std::abs(k1f[0].coefficient(kk) - expected) < 1e-8 * std::abs(expected));

    VectorField zf(1, f.box());
    CHECK(norm_l2(apply_K1(op, M, zf)) == 0.0);

    BTensor zero(cell.basis);
    CHECK(norm_l2(apply_K1(op, assemble_M(zero), f)) == 0.0);
  }

  TEST_CASE("generalized gradients") {
    CoefficientArray A = builtin_coefficients(
        "constant", {{"d", 1}, {"m", 1}, {"n", 1}, {"value_re", 1.0}});
    VectorField w = build_forcing(default_forcing(1, 1), 1, 1);
    FieldArray fine = generalized_gradient(A, 4, w);
    FieldArray grad = gradient_array(w, 1);
    CHECK(norm_l2(fine.at(0) - grad.at(0)) < 1e-13);

    VectorField zero(1, w.box());
    CHECK(norm_l2(generalized_gradient(A, 4, zero)) == 0.0);

    CellData cell = solve_all(A, {});
    FieldArray hom = generalized_gradient(cell.effective, w);
    CHECK(norm_l2(hom.at(0) - grad.at(0)) < 1e-13);
  }
}
