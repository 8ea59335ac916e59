#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "hihomog/multiindex.hpp"

namespace hihomog {

using Complex = std::complex<double>;

// Frequency box |k_j| <= cutoff[j] per axis, row-major storage over the
// shifted index k_j + cutoff[j].
class ModeBox {
 public:
  ModeBox() = default;
  explicit ModeBox(std::vector<int> cutoff);
  static ModeBox uniform(int d, int cutoff);

  int dim() const { return static_cast<int>(cutoff_.size()); }
  const std::vector<int>& cutoff() const { return cutoff_; }
  std::size_t size() const { return size_; }
  bool contains(std::span<const int> k) const;
  std::size_t index(std::span<const int> k) const;
  void mode_of(std::size_t idx, std::span<int> k) const;

  bool operator==(const ModeBox&) const = default;

 private:
  std::vector<int> cutoff_;
  std::vector<std::size_t> stride_;
  std::size_t size_ = 0;
};

// Componentwise max of the cutoffs.
ModeBox hull(const ModeBox& a, const ModeBox& b);

// Visit every mode of the box: f(std::span<const int> k, std::size_t index).
void for_each_mode(const ModeBox& box,
                   const std::function<void(std::span<const int>, std::size_t)>& f);

// (2 pi i k)^alpha, the Fourier symbol of D^alpha.
Complex derivative_symbol(std::span<const int> k, const MultiIndex& alpha);

// prod_j sinc(pi eps k_j), the Fourier symbol of Steklov smoothing
// (cell average over the eps-cube).
double steklov_symbol(std::span<const int> k, double eps);

// 1 + sum_{|alpha|=m} (2 pi k)^{2 alpha}; the H^m norm weight, and its
// reciprocal is the H^{-m} weight.
double sobolev_weight(std::span<const int> k, int m);

// A 1-periodic function phi(y) = sum_k c(k) e^{2 pi i k.y} held as truncated
// Fourier coefficients. Immutable by convention once built: operations
// return new fields.
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(ModeBox box);

  static SpectralField constant(int d, Complex value);
  // Single mode amp * e^{2 pi i k.y} on the minimal box containing k.
  static SpectralField mode(std::span<const int> k, Complex amp);

  const ModeBox& box() const { return box_; }
  int dim() const { return box_.dim(); }
  std::size_t num_modes() const { return coef_.size(); }

  Complex& operator[](std::size_t i) { return coef_[i]; }
  const Complex& operator[](std::size_t i) const { return coef_[i]; }
  std::span<Complex> coeffs() { return coef_; }
  std::span<const Complex> coeffs() const { return coef_; }

  // Zero outside the box.
  Complex coefficient(std::span<const int> k) const;
  void set_coefficient(std::span<const int> k, Complex v);
  // <phi> = integral over the unit cell = the k=0 coefficient.
  Complex mean() const;

  SpectralField& operator+=(const SpectralField& other);  // requires equal boxes
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(Complex s);

 private:
  ModeBox box_;
  std::vector<Complex> coef_;
};

// Sum/difference on the hull box.
SpectralField operator+(const SpectralField& a, const SpectralField& b);
SpectralField operator-(const SpectralField& a, const SpectralField& b);
SpectralField operator*(Complex s, const SpectralField& a);

// Copy onto another box; modes outside the target are dropped, new modes
// are zero.
SpectralField resized(const SpectralField& phi, const ModeBox& box);

// D^alpha phi via the multiplier (2 pi i k)^alpha.
SpectralField derivative(const SpectralField& phi, const MultiIndex& alpha);

// phi(K y): frequency relabeling k -> K k. Exact on the big torus.
SpectralField rescale(const SpectralField& phi, int K);

// conj(phi): coefficient conj(c(-k)).
SpectralField conjugated(const SpectralField& phi);

// Exact de-aliased product. The result lives on the sum box (or out_box,
// truncating); retained coefficients are exact for band-limited factors.
SpectralField multiply(const SpectralField& a, const SpectralField& b);
SpectralField multiply(const SpectralField& a, const SpectralField& b,
                       const ModeBox& out_box);

// Steklov smoothing S^eps as a multiplier; commutes with derivative().
SpectralField steklov(const SpectralField& phi, double eps);

// Inner product (a, b) with the first argument conjugated (Parseval sum).
Complex inner(const SpectralField& a, const SpectralField& b);
double norm_l2(const SpectralField& phi);

struct Norms {
  double l2;
  double hm;          // (|grad^m phi|^2 + |phi|^2)^{1/2}
  double h_negative;  // dual-weight norm
};
Norms norms(const SpectralField& phi, int m);
double norm_hm(const SpectralField& phi, int m);
double norm_h_negative(const SpectralField& phi, int m);

// Point samples phi(i/M) on a row-major grid, and the inverse (analysis +
// truncation to the box).
std::vector<Complex> sample_grid(const SpectralField& phi, std::span<const int> dims);
SpectralField field_from_samples(std::span<const Complex> samples,
                                 std::span<const int> dims, const ModeBox& box);

double max_abs_on_grid(const SpectralField& phi, std::span<const int> dims);

// n-component vector function; all components share one box.
class VectorField {
 public:
  VectorField() = default;
  VectorField(int n, ModeBox box);
  explicit VectorField(std::vector<SpectralField> components);

  int components() const { return static_cast<int>(comp_.size()); }
  const ModeBox& box() const { return comp_.front().box(); }
  SpectralField& operator[](int j) { return comp_[static_cast<std::size_t>(j)]; }
  const SpectralField& operator[](int j) const { return comp_[static_cast<std::size_t>(j)]; }

  VectorField& operator+=(const VectorField& other);
  VectorField& operator-=(const VectorField& other);
  VectorField& operator*=(Complex s);

 private:
  std::vector<SpectralField> comp_;
};

VectorField operator+(const VectorField& a, const VectorField& b);
VectorField operator-(const VectorField& a, const VectorField& b);
VectorField operator*(Complex s, const VectorField& a);

VectorField resized(const VectorField& u, const ModeBox& box);
VectorField derivative(const VectorField& u, const MultiIndex& alpha);
VectorField rescale(const VectorField& u, int K);
VectorField steklov(const VectorField& u, double eps);
Complex inner(const VectorField& a, const VectorField& b);
double norm_l2(const VectorField& u);
double norm_hm(const VectorField& u, int m);
double norm_h_negative(const VectorField& u, int m);
Norms norms(const VectorField& u, int m);

// Array {F_{j,gamma}} over the multiindices of an order-m basis; holds
// grad^m phi, coefficient columns, flux vectors.
class FieldArray {
 public:
  FieldArray() = default;
  FieldArray(std::vector<MultiIndex> indices, int n, const ModeBox& box);

  int slots() const { return static_cast<int>(indices_.size()); }
  int components() const { return entries_.front().components(); }
  const std::vector<MultiIndex>& indices() const { return indices_; }
  const MultiIndex& index_at(int slot) const { return indices_[static_cast<std::size_t>(slot)]; }
  VectorField& at(int slot) { return entries_[static_cast<std::size_t>(slot)]; }
  const VectorField& at(int slot) const { return entries_[static_cast<std::size_t>(slot)]; }

 private:
  std::vector<MultiIndex> indices_;
  std::vector<VectorField> entries_;
};

// (grad^m phi)_{j,gamma} = D^gamma phi_j over all |gamma| = m.
FieldArray gradient_array(const VectorField& phi, int m);

// First argument conjugated, summed over components and slots.
Complex inner(const FieldArray& a, const FieldArray& b);
double norm_l2(const FieldArray& a);
FieldArray steklov(const FieldArray& a, double eps);

}  // namespace hihomog
