#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hihomog/multiindex.hpp"
#include "hihomog/spectral.hpp"

namespace hihomog {

// n x n matrix of periodic fields; one (alpha, beta) block of a
// coefficient array.
class MatrixField {
 public:
  MatrixField() = default;
  MatrixField(int n, const ModeBox& box);

  int components() const { return n_; }
  SpectralField& at(int j, int k) { return e_[static_cast<std::size_t>(j * n_ + k)]; }
  const SpectralField& at(int j, int k) const { return e_[static_cast<std::size_t>(j * n_ + k)]; }

 private:
  int n_ = 0;
  std::vector<SpectralField> e_;
};

// The array A = {A^{jk}_{alpha beta}(y)} of 1-periodic coefficients for the
// order-2m operator, with ellipticity metadata (lambda0, lambda1).
// Structurally zero (alpha, beta) blocks are not stored.
class CoefficientArray {
 public:
  CoefficientArray() = default;
  CoefficientArray(IndexBasis basis, double lambda0, double lambda1);

  const IndexBasis& basis() const { return basis_; }
  int dim() const { return basis_.dim(); }
  int order_half() const { return basis_.m(); }
  int components() const { return basis_.components(); }

  double lambda0() const { return lambda0_; }
  double lambda1() const { return lambda1_; }

  bool has_block(int a, int b) const;
  const MatrixField& block(int a, int b) const;
  void set_block(int a, int b, MatrixField field);

  // Per-axis band over all stored entries.
  std::vector<int> band() const;
  // True when every entry has a conjugate-symmetric spectrum.
  bool is_real(double tol = 1e-12) const;
  // Max pointwise operator norm of the (alpha,beta)-block matrix sampled on
  // an oversampled grid; finite L-infinity check against lambda1.
  double linf_estimate() const;

  std::string family() const { return family_; }
  void set_family(std::string name) { family_ = std::move(name); }

 private:
  IndexBasis basis_;
  double lambda0_ = 0.0, lambda1_ = 0.0;
  std::vector<std::optional<MatrixField>> blocks_;
  std::string family_;
};

// A* with A*^{jk}_{alpha beta}(y) = conj(A^{kj}_{beta alpha}(y)); an
// involution, and the coefficient array of the adjoint operator.
CoefficientArray adjoint(const CoefficientArray& A);

struct CoercivityEstimate {
  double value = 0.0;     // smallest Rayleigh quotient found
  bool positive = false;  // failure (non-positive) flags an inadmissible family
  int iterations = 0;
  double residual = 0.0;  // eigenresidual of the final iterate
};

// Smallest eigenvalue of the Hermitian part of the Galerkin form
// Re(grad^m phi, A grad^m phi)_Y / |grad^m phi|_Y^2 over mean-zero trig
// polynomials up to sample_cutoff, by inverse power iteration. Advisory
// estimate, not a certificate.
CoercivityEstimate check_coercivity(const CoefficientArray& A, int sample_cutoff);

// Built-in test families. Parameters not listed are defaulted; unknown
// names or parameters outside the documented coercivity margin throw.
//
//   constant   d, m, n, value_re, value_im     A_{ab} = e_{ab} * value * I
//   harmonic   m, band                          d=1, a(y) = 1/(2 + cos 2 pi y)
//   separable  m, rho, band                     d=2 scalar product family
//   nonsym     d, m, rho                        n=2, I + rho * J cos(2 pi y1)
//   complex    d, m, rho                        scalar 1 + rho e^{2 pi i y1}
//   skew       m, rho                           d=2 scalar, skew (alpha,beta)
//                                               coupling with band-2 profile
CoefficientArray builtin_coefficients(const std::string& name,
                                      const std::map<std::string, double>& params = {});

// Parses "name" or "name:key=value,key=value".
CoefficientArray builtin_coefficients_spec(const std::string& spec);

}  // namespace hihomog
