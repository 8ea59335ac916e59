#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "hihomog/cell.hpp"
#include "hihomog/serialize.hpp"

using namespace hihomog;

namespace {

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "hihomog_io_test";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("field files round-trip bit exactly") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> dist;
    for (int trial = 0; trial < 5; ++trial) {
      VectorField f(2, ModeBox(std::vector<int>{3, 2}));
      for (int j = 0; j < 2; ++j) {
        for (std::size_t i = 0; i < f[j].num_modes(); ++i) {
          f[j][i] = Complex{dist(rng), dist(rng)};
        }
      }
      auto path = (temp_dir() / "field.hhf").string();
      save_field(f, path);
      VectorField g = load_field(path);
      REQUIRE(g.components() == 2);
      REQUIRE(g.box() == f.box());
      for (int j = 0; j < 2; ++j) {
        for (std::size_t i = 0; i < f[j].num_modes(); ++i) CHECK(f[j][i] == g[j][i]);
      }
    }
  }

  TEST_CASE("csv export has the documented shape") {
    int kk[1] = {1};
    SpectralField f = SpectralField::mode(kk, Complex{1.0, 0.0});
    auto path = (temp_dir() / "field.csv").string();
    export_csv(f, {8}, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "x1,re,im");
    int lines = 0;
    for (std::string line; std::getline(in, line);) ++lines;
    CHECK(lines == 8);
  }

  TEST_CASE("coefficient manifests round-trip") {
    for (const char* spec : {"harmonic:m=2,band=8", "nonsym:d=2,m=2,rho=0.3",
                             "skew:m=2,rho=0.6"}) {
      CoefficientArray A = builtin_coefficients_spec(spec);
      auto path = (temp_dir() / "coeffs.json").string();
      save_coefficients(A, path);
      CoefficientArray B = load_coefficients(path);
      CHECK(B.basis() == A.basis());
      CHECK(B.lambda0() == A.lambda0());
      CHECK(B.lambda1() == A.lambda1());
      for (int a = 0; a < A.basis().size(); ++a) {
        for (int b = 0; b < A.basis().size(); ++b) {
          REQUIRE(A.has_block(a, b) == B.has_block(a, b));
          if (!A.has_block(a, b)) continue;
          for (int j = 0; j < A.basis().components(); ++j) {
            for (int k = 0; k < A.basis().components(); ++k) {
              CHECK(norm_l2(A.block(a, b).at(j, k) - B.block(a, b).at(j, k)) < 1e-15);
            }
          }
        }
      }
    }
  }

  TEST_CASE("cell data directories round-trip") {
    CoefficientArray A = builtin_coefficients("harmonic", {{"m", 1}, {"band", 8}});
    CellData cell = solve_all(A, {});
    auto dir = (temp_dir() / "cell").string();
    save_cell_data(cell, dir);
    CellData loaded = load_cell_data(dir);
    CHECK(loaded.basis == cell.basis);
    CHECK(loaded.box == cell.box);
    CHECK(loaded.has_adjoint);
    CHECK(distance(loaded.effective, cell.effective) == 0.0);
    for (std::size_t i = 0; i < cell.correctors.size(); ++i) {
      CHECK(norm_l2(loaded.correctors[i] - cell.correctors[i]) == 0.0);
    }
    for (std::size_t i = 0; i < cell.flux.size(); ++i) {
      CHECK(norm_l2(loaded.flux[i] - cell.flux[i]) == 0.0);
    }
    CHECK(loaded.records.size() == cell.records.size());
  }
}
