#pragma once

#include <complex>
#include <span>
#include <vector>

namespace hihomog::detail {

using Complex = std::complex<double>;

// Smallest grid size >= n whose prime factors are all in {2,3,5,7}.
int fast_grid_size(int n);

// In-place multidimensional complex DFT on a row-major grid.
// synthesis: samples(x_i) = sum_k coef(k) e^{+2 pi i k.x_i}  (no scaling)
// analysis:  coef(k) = (1/N) sum_i samples(x_i) e^{-2 pi i k.x_i}
// Plans are cached per (dims, direction) behind a mutex; execution is
// thread safe on distinct buffers.
void dft_synthesis(std::span<Complex> grid, std::span<const int> dims);
void dft_analysis(std::span<Complex> grid, std::span<const int> dims);

}  // namespace hihomog::detail
