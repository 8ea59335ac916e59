#include "hihomog/detail/operator_kernel.hpp"

#include <algorithm>
#include <stdexcept>

#include "hihomog/detail/fft.hpp"

namespace hihomog::detail {

namespace {

std::size_t total_of(std::span<const int> dims) {
  std::size_t t = 1;
  for (int d : dims) t *= static_cast<std::size_t>(d);
  return t;
}

inline std::size_t wrap(int k, int M) {
  int r = k % M;
  if (r < 0) r += M;
  return static_cast<std::size_t>(r);
}

std::size_t grid_index(std::span<const int> k, std::span<const int> dims) {
  std::size_t idx = 0;
  for (std::size_t j = 0; j < dims.size(); ++j) {
    idx = idx * static_cast<std::size_t>(dims[j]) + wrap(k[j], dims[j]);
  }
  return idx;
}

}  // namespace

DivFormKernel::DivFormKernel(const CoefficientArray& A, ModeBox solution_box, int tile)
    : DivFormKernel(A, solution_box, tile, solution_box) {}

DivFormKernel::DivFormKernel(const CoefficientArray& A, ModeBox solution_box, int tile,
                             const ModeBox& max_out_box)
    : basis_(A.basis()), box_(std::move(solution_box)), max_out_(max_out_box), tile_(tile) {
  if (tile_ < 1) throw std::invalid_argument("DivFormKernel: tile must be >= 1");
  if (box_.dim() != basis_.dim() || max_out_.dim() != basis_.dim()) {
    throw std::invalid_argument("DivFormKernel: dimension mismatch");
  }

  const int d = box_.dim();
  const std::vector<int> bandA = A.band();
  grid_dims_.resize(static_cast<std::size_t>(d));
  cell_dims_.resize(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    // No retained mode may alias: M > in + out + tile * band(A).
    int needed = box_.cutoff()[j] + max_out_.cutoff()[j] +
                 tile_ * bandA[static_cast<std::size_t>(j)] + 1;
    int mc = fast_grid_size((needed + tile_ - 1) / tile_);
    cell_dims_[static_cast<std::size_t>(j)] = mc;
    grid_dims_[static_cast<std::size_t>(j)] = tile_ * mc;
  }

  if (tile_ > 1) {
    const std::size_t total = total_of(grid_dims_);
    tile_map_.resize(total);
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    for (std::size_t i = 0; i < total; ++i) {
      std::size_t ci = 0;
      for (int j = 0; j < d; ++j) {
        ci = ci * static_cast<std::size_t>(cell_dims_[static_cast<std::size_t>(j)]) +
             static_cast<std::size_t>(idx[static_cast<std::size_t>(j)] %
                                      cell_dims_[static_cast<std::size_t>(j)]);
      }
      tile_map_[i] = static_cast<std::uint32_t>(ci);
      for (int j = d - 1; j >= 0; --j) {
        if (++idx[static_cast<std::size_t>(j)] < grid_dims_[static_cast<std::size_t>(j)]) break;
        idx[static_cast<std::size_t>(j)] = 0;
      }
    }
  }

  const int mbar = basis_.size();
  const int n = basis_.components();
  samples_.resize(static_cast<std::size_t>(mbar * mbar));
  block_present_.assign(static_cast<std::size_t>(mbar * mbar), false);
  for (int a = 0; a < mbar; ++a) {
    for (int b = 0; b < mbar; ++b) {
      if (!A.has_block(a, b)) continue;
      block_present_[static_cast<std::size_t>(a * mbar + b)] = true;
      auto& grids = samples_[static_cast<std::size_t>(a * mbar + b)];
      grids.resize(static_cast<std::size_t>(n * n));
      for (int j = 0; j < n; ++j) {
        for (int p = 0; p < n; ++p) {
          grids[static_cast<std::size_t>(j * n + p)] =
              sample_grid(A.block(a, b).at(j, p), cell_dims_);
        }
      }
    }
  }
}

void DivFormKernel::product_pass(const std::vector<std::vector<Complex>>& vgrids,
                                 std::vector<std::vector<Complex>>& wgrids) const {
  const int mbar = basis_.size();
  const int n = basis_.components();
  const std::size_t total = total_of(grid_dims_);
  for (int a = 0; a < mbar; ++a) {
    for (int b = 0; b < mbar; ++b) {
      if (!block_present_[static_cast<std::size_t>(a * mbar + b)]) continue;
      const auto& grids = samples_[static_cast<std::size_t>(a * mbar + b)];
      for (int j = 0; j < n; ++j) {
        auto& w = wgrids[static_cast<std::size_t>(a * n + j)];
        for (int p = 0; p < n; ++p) {
          const auto& s = grids[static_cast<std::size_t>(j * n + p)];
          const auto& v = vgrids[static_cast<std::size_t>(b * n + p)];
          if (tile_ == 1) {
            for (std::size_t i = 0; i < total; ++i) w[i] += s[i] * v[i];
          } else {
            for (std::size_t i = 0; i < total; ++i) w[i] += s[tile_map_[i]] * v[i];
          }
        }
      }
    }
  }
}

void DivFormKernel::apply_div_form(std::span<const Complex> u, std::span<Complex> y) const {
  const int mbar = basis_.size();
  const int n = basis_.components();
  const std::size_t box_size = box_.size();
  const std::size_t total = total_of(grid_dims_);

  std::vector<std::vector<Complex>> vgrids(static_cast<std::size_t>(mbar * n));
  for (int b = 0; b < mbar; ++b) {
    const MultiIndex& beta = basis_.at(b);
    for (int p = 0; p < n; ++p) {
      auto& g = vgrids[static_cast<std::size_t>(b * n + p)];
      g.assign(total, Complex{0.0, 0.0});
      std::span<const Complex> up = u.subspan(static_cast<std::size_t>(p) * box_size, box_size);
      for_each_mode(box_, [&](std::span<const int> k, std::size_t i) {
        g[grid_index(k, grid_dims_)] = derivative_symbol(k, beta) * up[i];
      });
      dft_synthesis(g, grid_dims_);
    }
  }

  std::vector<std::vector<Complex>> wgrids(static_cast<std::size_t>(mbar * n));
  for (auto& w : wgrids) w.assign(total, Complex{0.0, 0.0});
  product_pass(vgrids, wgrids);
  vgrids.clear();
  vgrids.shrink_to_fit();

  std::fill(y.begin(), y.end(), Complex{0.0, 0.0});
  for (int a = 0; a < mbar; ++a) {
    const MultiIndex& alpha = basis_.at(a);
    for (int j = 0; j < n; ++j) {
      auto& w = wgrids[static_cast<std::size_t>(a * n + j)];
      dft_analysis(w, grid_dims_);
      std::span<Complex> yj = y.subspan(static_cast<std::size_t>(j) * box_size, box_size);
      // adjoint multiplier conj((2 pi i k)^alpha): the (-1)^m of div_m
      for_each_mode(box_, [&](std::span<const int> k, std::size_t i) {
        yj[i] += std::conj(derivative_symbol(k, alpha)) * w[grid_index(k, grid_dims_)];
      });
    }
  }
}

FieldArray DivFormKernel::apply_blocks(const FieldArray& V, const ModeBox& out_box) const {
  const int mbar = basis_.size();
  const int n = basis_.components();
  if (V.slots() != mbar || V.components() != n) {
    throw std::invalid_argument("apply_blocks: array shape mismatch");
  }
  for (int j = 0; j < box_.dim(); ++j) {
    if (V.at(0).box().cutoff()[j] > box_.cutoff()[j] ||
        out_box.cutoff()[j] > max_out_.cutoff()[j]) {
      throw std::invalid_argument("apply_blocks: request exceeds kernel grid");
    }
  }

  const std::size_t total = total_of(grid_dims_);
  std::vector<std::vector<Complex>> vgrids(static_cast<std::size_t>(mbar * n));
  for (int b = 0; b < mbar; ++b) {
    for (int p = 0; p < n; ++p) {
      auto& g = vgrids[static_cast<std::size_t>(b * n + p)];
      g.assign(total, Complex{0.0, 0.0});
      const SpectralField& f = V.at(b)[p];
      for_each_mode(f.box(), [&](std::span<const int> k, std::size_t i) {
        g[grid_index(k, grid_dims_)] = f[i];
      });
      dft_synthesis(g, grid_dims_);
    }
  }

  std::vector<std::vector<Complex>> wgrids(static_cast<std::size_t>(mbar * n));
  for (auto& w : wgrids) w.assign(total, Complex{0.0, 0.0});
  product_pass(vgrids, wgrids);
  vgrids.clear();
  vgrids.shrink_to_fit();

  FieldArray W(basis_.list(), n, out_box);
  for (int a = 0; a < mbar; ++a) {
    for (int j = 0; j < n; ++j) {
      auto& w = wgrids[static_cast<std::size_t>(a * n + j)];
      dft_analysis(w, grid_dims_);
      SpectralField& out = W.at(a)[j];
      for_each_mode(out_box, [&](std::span<const int> k, std::size_t i) {
        out[i] = w[grid_index(k, grid_dims_)];
      });
    }
  }
  return W;
}

void flatten(const VectorField& u, std::span<Complex> out) {
  const std::size_t s = u.box().size();
  for (int j = 0; j < u.components(); ++j) {
    std::copy(u[j].coeffs().begin(), u[j].coeffs().end(),
              out.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(j) * s));
  }
}

VectorField unflatten(std::span<const Complex> v, int n, const ModeBox& box) {
  VectorField u(n, box);
  const std::size_t s = box.size();
  for (int j = 0; j < n; ++j) {
    std::copy(v.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(j) * s),
              v.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(j + 1) * s),
              u[j].coeffs().begin());
  }
  return u;
}

}  // namespace hihomog::detail
