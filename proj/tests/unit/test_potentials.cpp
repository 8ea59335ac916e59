#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "hihomog/cell.hpp"
#include "hihomog/potentials.hpp"

using namespace hihomog;

namespace {

constexpr double kPi = std::numbers::pi;

// g = (D2 h, -D1 h) for h = sin(2 pi y1) sin(2 pi y2): divergence free and
// mean zero by construction.
FieldArray curl_flux() {
  SpectralField h(ModeBox::uniform(2, 1));
  // sin sin = -1/4 (e_{(1,1)} - e_{(1,-1)} - e_{(-1,1)} + e_{(-1,-1)})
  int pp[2] = {1, 1}, pm[2] = {1, -1}, mp[2] = {-1, 1}, mm[2] = {-1, -1};
  h.set_coefficient(pp, Complex{-0.25, 0.0});
  h.set_coefficient(pm, Complex{0.25, 0.0});
  h.set_coefficient(mp, Complex{0.25, 0.0});
  h.set_coefficient(mm, Complex{-0.25, 0.0});

  FieldArray g(enumerate_multiindices(1, 2), 1, h.box());
  int a01 = 0;  // (0,1) precedes (1,0) lexicographically
  int a10 = 1;
  g.at(a01)[0] = Complex{-1.0, 0.0} * derivative(h, MultiIndex{1, 0});
  g.at(a10)[0] = derivative(h, MultiIndex{0, 1});
  return g;
}

}  // namespace

TEST_SUITE("potentials") {
  TEST_CASE("zero flux gives zero potential") {
    FieldArray g(enumerate_multiindices(2, 2), 1, ModeBox::uniform(2, 3));
    PotentialMatrix G = build_potential(g);
    for (int i = 0; i < G.slots(); ++i) {
      for (int j = 0; j < G.slots(); ++j) CHECK(norm_l2(G.entry(i, j)) == 0.0);
    }
    CHECK(representation_residual(G, g) == 0.0);
  }

  TEST_CASE("curl flux is reproduced exactly") {
    FieldArray g = curl_flux();
    CHECK(divergence_residual(g) < 1e-14);
    PotentialMatrix G = build_potential(g);
    CHECK(skew_symmetry_defect(G) == 0.0);
    CHECK(representation_residual(G, g) < 1e-12);
    CHECK(potential_bound_ratio(G, g) > 0.0);
  }

  TEST_CASE("preconditions are enforced with the measured defect") {
    FieldArray g = curl_flux();
    // break the mean
    FieldArray bad_mean = g;
    std::vector<int> zero{0, 0};
    bad_mean.at(0)[0].set_coefficient(zero, Complex{0.5, 0.0});
    CHECK_THROWS_AS(build_potential(bad_mean), std::invalid_argument);
    // break the divergence
    FieldArray bad_div = g;
    int kk[2] = {1, 1};
    bad_div.at(0)[0].set_coefficient(kk, bad_div.at(0)[0].coefficient(kk) + Complex{0.3, 0.0});
    CHECK_THROWS_AS(build_potential(bad_div), std::invalid_argument);
  }

  TEST_CASE("rescaled identities on the big torus") {
    FieldArray g = curl_flux();
    PotentialMatrix G = build_potential(g);
    int kk[2] = {1, 1};
    SpectralField Phi = SpectralField::mode(kk, Complex{1.0, 0.0});
    std::mt19937_64 rng(31);
    std::normal_distribution<double> dist;
    SpectralField phi(ModeBox::uniform(2, 2));
    for (std::size_t i = 0; i < phi.num_modes(); ++i) phi[i] = Complex{dist(rng), dist(rng)};

    Lemma22Report rep = verify_lemma22(G, g, Phi, 8, phi);
    CHECK(rep.product_identity_residual < 1e-10);
    CHECK(rep.divergence_free_residual < 1e-10);
    CHECK(rep.quadratic_form_residual < 1e-10);
  }

  TEST_CASE("cell flux of the separable family round-trips through the potential") {
    CoefficientArray A = builtin_coefficients("separable", {{"m", 1}, {"rho", 0.25}});
    CellSolveOptions opt;
    opt.cutoff = {20, 20};
    opt.krylov.tol = 1e-12;
    CellData cell = solve_all(A, opt);
    for (int b = 0; b < cell.basis.size(); ++b) {
      FieldArray col = cell.flux_column(0, b);
      if (norm_l2(col) < 1e-12) continue;
      PotentialMatrix G = build_potential(col);
      CHECK(skew_symmetry_defect(G) == 0.0);
      CHECK(representation_residual(G, col) < 1e-9);
      Lemma22Report rep = verify_lemma22(G, col, SpectralField::mode(std::vector<int>{1, 1},
                                                                     Complex{1.0, 0.0}),
                                         8, SpectralField::mode(std::vector<int>{2, 1},
                                                                Complex{0.7, 0.1}));
      CHECK(rep.product_identity_residual < 1e-10);
      CHECK(rep.divergence_free_residual < 1e-10);
      CHECK(rep.quadratic_form_residual < 1e-10);
    }
  }

  TEST_CASE("bound ratio is stable under cutoff refinement") {
    CoefficientArray A = builtin_coefficients("separable", {{"m", 2}, {"rho", 0.25}});
    CellSolveOptions opt;
    opt.krylov.tol = 1e-12;
    opt.cutoff = {20, 20};
    CellData c1 = solve_all(A, opt);
    opt.cutoff = {40, 40};
    CellData c2 = solve_all(A, opt);
    for (int b = 0; b < c1.basis.size(); ++b) {
      FieldArray g1 = c1.flux_column(0, b);
      FieldArray g2 = c2.flux_column(0, b);
      if (norm_l2(g1) < 1e-12) continue;
      double r1 = potential_bound_ratio(build_potential(g1), g1);
      double r2 = potential_bound_ratio(build_potential(g2), g2);
      CHECK(r2 <= 1.25 * r1);
    }
  }
}
