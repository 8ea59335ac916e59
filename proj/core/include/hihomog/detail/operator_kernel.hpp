#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hihomog/coefficients.hpp"
#include "hihomog/multiindex.hpp"
#include "hihomog/spectral.hpp"

namespace hihomog::detail {

// Matrix-free kernel for divergence-form applications: gradient
// multipliers, pointwise coefficient products on an oversized de-aliased
// grid, adjoint multipliers. tile = K composes coefficients with y -> K y,
// i.e. the eps-periodic array A(x/eps) on the big torus; samples are held
// on the cell grid and tiled through an index map.
//
// Flattened vectors are component-major: component j occupies
// [j * box.size(), (j+1) * box.size()).
class DivFormKernel {
 public:
  // The product grid is sized so that any request with input inside
  // solution_box and output inside max_out_box is exact. max_out_box
  // defaults to solution_box.
  DivFormKernel(const CoefficientArray& A, ModeBox solution_box, int tile);
  DivFormKernel(const CoefficientArray& A, ModeBox solution_box, int tile,
                const ModeBox& max_out_box);

  const ModeBox& box() const { return box_; }
  const IndexBasis& basis() const { return basis_; }
  int tile() const { return tile_; }
  std::size_t vector_size() const {
    return static_cast<std::size_t>(basis_.components()) * box_.size();
  }

  // y(k) = sum_alpha conj((2 pi i k)^alpha) [sum_beta A_{alpha beta} D^beta u]^(k),
  // truncated to the solution box. This is (-1)^m div_m(A grad^m u), the
  // principal part of L, and (u, y) equals the sesquilinear form
  // (grad^m u, A grad^m u), so its Hermitian part inherits the Garding bound.
  void apply_div_form(std::span<const Complex> u, std::span<Complex> y) const;

  // W_alpha = sum_beta A_{alpha beta} V_beta, exact on out_box for
  // band-limited V over the same basis.
  FieldArray apply_blocks(const FieldArray& V, const ModeBox& out_box) const;

 private:
  void product_pass(const std::vector<std::vector<Complex>>& vgrids,
                    std::vector<std::vector<Complex>>& wgrids) const;

  IndexBasis basis_;
  ModeBox box_;
  ModeBox max_out_;
  int tile_ = 1;
  std::vector<int> grid_dims_;           // padded product grid M_j (tile * cell_dims_)
  std::vector<int> cell_dims_;           // coefficient sample grid M_j / tile
  std::vector<std::uint32_t> tile_map_;  // grid index -> cell-grid index (tile > 1)
  // samples_[a*mbar+b], when the block exists: n*n grids (j*n+p) on cell_dims_
  std::vector<std::vector<std::vector<Complex>>> samples_;
  std::vector<bool> block_present_;
};

// Flatten/unflatten between VectorField and the solver layout.
void flatten(const VectorField& u, std::span<Complex> out);
VectorField unflatten(std::span<const Complex> v, int n, const ModeBox& box);

}  // namespace hihomog::detail
