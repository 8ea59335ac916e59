// Test-only oracles, independent of the matrix-free solver path: dense
// Galerkin assembly for 1D scalar problems and periodic quadrature.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "hihomog/coefficients.hpp"
#include "hihomog/spectral.hpp"

namespace testing_oracles {

using hihomog::Complex;

inline Complex pm(int k, int m) {
  Complex p{1.0, 0.0};
  for (int i = 0; i < m; ++i) p *= Complex{0.0, 2.0 * std::numbers::pi * k};
  return p;
}

// Dense Galerkin matrix of the 1D scalar cell problem on modes
// [-N..N] \ {0}: rows conj(p(k)) a(k - l) p(l); right side
// -conj(p(k)) a(k) for the single gamma = (m).
struct DenseCell {
  Eigen::VectorXcd solution;  // ordered over modes != 0
  std::vector<int> modes;
};

inline DenseCell dense_cell_solve(const hihomog::SpectralField& a, int m, int N) {
  std::vector<int> modes;
  for (int k = -N; k <= N; ++k) {
    if (k != 0) modes.push_back(k);
  }
  const int n = static_cast<int>(modes.size());
  Eigen::MatrixXcd B(n, n);
  Eigen::VectorXcd rhs(n);
  for (int r = 0; r < n; ++r) {
    int kr = modes[static_cast<std::size_t>(r)];
    for (int c = 0; c < n; ++c) {
      int kc = modes[static_cast<std::size_t>(c)];
      int diff[1] = {kr - kc};
      B(r, c) = std::conj(pm(kr, m)) * a.coefficient(diff) * pm(kc, m);
    }
    int kk[1] = {kr};
    rhs(r) = -std::conj(pm(kr, m)) * a.coefficient(kk);
  }
  DenseCell out;
  out.solution = B.colPivHouseholderQr().solve(rhs);
  out.modes = std::move(modes);
  return out;
}

// Dense Galerkin solve of (L_eps + I) u = f for the 1D scalar problem on
// modes [-N..N]; a_eps(k) = a(k / K) when K | k.
inline Eigen::VectorXcd dense_fine_solve(const hihomog::SpectralField& a, int m, int K,
                                         const hihomog::SpectralField& f, int N,
                                         std::vector<int>& modes) {
  modes.clear();
  for (int k = -N; k <= N; ++k) modes.push_back(k);
  const int n = static_cast<int>(modes.size());
  Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(n, n);
  Eigen::VectorXcd rhs(n);
  for (int r = 0; r < n; ++r) {
    int kr = modes[static_cast<std::size_t>(r)];
    for (int c = 0; c < n; ++c) {
      int kc = modes[static_cast<std::size_t>(c)];
      int diff = kr - kc;
      Complex aval{0.0, 0.0};
      if (diff % K == 0) {
        int cell_k[1] = {diff / K};
        aval = a.coefficient(cell_k);
      }
      B(r, c) = std::conj(pm(kr, m)) * aval * pm(kc, m);
      if (r == c) B(r, c) += Complex{1.0, 0.0};
    }
    int kk[1] = {kr};
    rhs(r) = f.coefficient(kk);
  }
  return B.colPivHouseholderQr().solve(rhs);
}

// Trapezoid mean of a periodic closed-form function; spectrally accurate.
template <class F>
double periodic_mean(F&& f, int samples = 8192) {
  double acc = 0.0;
  for (int i = 0; i < samples; ++i) acc += f(static_cast<double>(i) / samples);
  return acc / samples;
}

}  // namespace testing_oracles
