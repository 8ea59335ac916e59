#include "hihomog/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hihomog/detail/fft.hpp"

namespace hihomog {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_same_box(const ModeBox& a, const ModeBox& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": mode boxes differ");
}

// Wrap mode k into the circular index of an M-point grid.
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

ModeBox::ModeBox(std::vector<int> cutoff) : cutoff_(std::move(cutoff)) {
  if (cutoff_.empty()) throw std::invalid_argument("ModeBox needs dimension >= 1");
  stride_.assign(cutoff_.size(), 1);
  size_ = 1;
  for (int c : cutoff_) {
    if (c < 0) throw std::invalid_argument("ModeBox cutoff must be >= 0");
  }
  for (std::size_t j = cutoff_.size(); j-- > 0;) {
    stride_[j] = size_;
    size_ *= static_cast<std::size_t>(2 * cutoff_[j] + 1);
  }
}

ModeBox ModeBox::uniform(int d, int cutoff) {
  return ModeBox(std::vector<int>(static_cast<std::size_t>(d), cutoff));
}

bool ModeBox::contains(std::span<const int> k) const {
  if (k.size() != cutoff_.size()) return false;
  for (std::size_t j = 0; j < cutoff_.size(); ++j) {
    if (std::abs(k[j]) > cutoff_[j]) return false;
  }
  return true;
}

std::size_t ModeBox::index(std::span<const int> k) const {
  std::size_t idx = 0;
  for (std::size_t j = 0; j < cutoff_.size(); ++j) {
    idx += stride_[j] * static_cast<std::size_t>(k[j] + cutoff_[j]);
  }
  return idx;
}

void ModeBox::mode_of(std::size_t idx, std::span<int> k) const {
  for (std::size_t j = 0; j < cutoff_.size(); ++j) {
    std::size_t w = static_cast<std::size_t>(2 * cutoff_[j] + 1);
    k[j] = static_cast<int>((idx / stride_[j]) % w) - cutoff_[j];
  }
}

ModeBox hull(const ModeBox& a, const ModeBox& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("hull: dimension mismatch");
  std::vector<int> c(static_cast<std::size_t>(a.dim()));
  for (int j = 0; j < a.dim(); ++j) c[static_cast<std::size_t>(j)] = std::max(a.cutoff()[j], b.cutoff()[j]);
  return ModeBox(std::move(c));
}

void for_each_mode(const ModeBox& box,
                   const std::function<void(std::span<const int>, std::size_t)>& f) {
  const int d = box.dim();
  std::vector<int> k(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) k[static_cast<std::size_t>(j)] = -box.cutoff()[j];
  const std::size_t n = box.size();
  for (std::size_t idx = 0; idx < n; ++idx) {
    f(k, idx);
    // odometer increment, last axis fastest
    for (int j = d - 1; j >= 0; --j) {
      if (k[static_cast<std::size_t>(j)] < box.cutoff()[j]) {
        ++k[static_cast<std::size_t>(j)];
        break;
      }
      k[static_cast<std::size_t>(j)] = -box.cutoff()[j];
    }
  }
}

Complex derivative_symbol(std::span<const int> k, const MultiIndex& alpha) {
  double mag = 1.0;
  int order = 0;
  for (int j = 0; j < alpha.dim(); ++j) {
    for (int p = 0; p < alpha[j]; ++p) mag *= kTwoPi * k[static_cast<std::size_t>(j)];
    order += alpha[j];
  }
  switch (order % 4) {  // i^order
    case 0: return {mag, 0.0};
    case 1: return {0.0, mag};
    case 2: return {-mag, 0.0};
    default: return {0.0, -mag};
  }
}

double steklov_symbol(std::span<const int> k, double eps) {
  double s = 1.0;
  for (int kj : k) {
    double t = std::numbers::pi * eps * kj;
    s *= (t == 0.0) ? 1.0 : std::sin(t) / t;
  }
  return s;
}

double sobolev_weight(std::span<const int> k, int m) {
  // sum over |alpha|=m of prod (2 pi k_j)^{2 alpha_j} equals the complete
  // homogeneous symmetric polynomial of degree m in the squares.
  std::vector<double> sq(k.size());
  for (std::size_t j = 0; j < k.size(); ++j) {
    double t = kTwoPi * k[j];
    sq[j] = t * t;
  }
  // h_p over the d variables, built by the standard recurrence.
  std::vector<double> h(static_cast<std::size_t>(m) + 1, 0.0);
  h[0] = 1.0;
  for (double x : sq) {
    for (std::size_t p = 1; p <= static_cast<std::size_t>(m); ++p) h[p] += x * h[p - 1];
  }
  return 1.0 + h[static_cast<std::size_t>(m)];
}

SpectralField::SpectralField(ModeBox box) : box_(std::move(box)), coef_(box_.size()) {}

SpectralField SpectralField::constant(int d, Complex value) {
  SpectralField f(ModeBox::uniform(d, 0));
  f.coef_[0] = value;
  return f;
}

SpectralField SpectralField::mode(std::span<const int> k, Complex amp) {
  std::vector<int> cut(k.size());
  for (std::size_t j = 0; j < k.size(); ++j) cut[j] = std::abs(k[j]);
  SpectralField f((ModeBox(std::move(cut))));
  f.set_coefficient(k, amp);
  return f;
}

Complex SpectralField::coefficient(std::span<const int> k) const {
  if (!box_.contains(k)) return {0.0, 0.0};
  return coef_[box_.index(k)];
}

void SpectralField::set_coefficient(std::span<const int> k, Complex v) {
  if (!box_.contains(k)) throw std::out_of_range("set_coefficient: mode outside box");
  coef_[box_.index(k)] = v;
}

Complex SpectralField::mean() const {
  std::vector<int> zero(static_cast<std::size_t>(dim()), 0);
  return coef_[box_.index(zero)];
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  require_same_box(box_, other.box_, "operator+=");
  for (std::size_t i = 0; i < coef_.size(); ++i) coef_[i] += other.coef_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  require_same_box(box_, other.box_, "operator-=");
  for (std::size_t i = 0; i < coef_.size(); ++i) coef_[i] -= other.coef_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(Complex s) {
  for (Complex& c : coef_) c *= s;
  return *this;
}

SpectralField operator+(const SpectralField& a, const SpectralField& b) {
  ModeBox box = hull(a.box(), b.box());
  SpectralField out = resized(a, box);
  out += resized(b, box);
  return out;
}

SpectralField operator-(const SpectralField& a, const SpectralField& b) {
  ModeBox box = hull(a.box(), b.box());
  SpectralField out = resized(a, box);
  out -= resized(b, box);
  return out;
}

SpectralField operator*(Complex s, const SpectralField& a) {
  SpectralField out = a;
  out *= s;
  return out;
}

SpectralField resized(const SpectralField& phi, const ModeBox& box) {
  if (box == phi.box()) return phi;
  SpectralField out(box);
  // copy the intersection
  for_each_mode(phi.box(), [&](std::span<const int> k, std::size_t i) {
    if (box.contains(k)) out[box.index(k)] = phi[i];
  });
  return out;
}

SpectralField derivative(const SpectralField& phi, const MultiIndex& alpha) {
  if (alpha.dim() != phi.dim()) throw std::invalid_argument("derivative: dimension mismatch");
  SpectralField out(phi.box());
  for_each_mode(phi.box(), [&](std::span<const int> k, std::size_t i) {
    out[i] = derivative_symbol(k, alpha) * phi[i];
  });
  return out;
}

SpectralField rescale(const SpectralField& phi, int K) {
  if (K < 1) throw std::invalid_argument("rescale: K must be >= 1");
  if (K == 1) return phi;
  std::vector<int> cut(phi.box().cutoff());
  for (int& c : cut) c *= K;
  SpectralField out((ModeBox(std::move(cut))));
  std::vector<int> kk(static_cast<std::size_t>(phi.dim()));
  for_each_mode(phi.box(), [&](std::span<const int> k, std::size_t i) {
    for (std::size_t j = 0; j < kk.size(); ++j) kk[j] = K * k[j];
    out[out.box().index(kk)] = phi[i];
  });
  return out;
}

SpectralField conjugated(const SpectralField& phi) {
  SpectralField out(phi.box());
  std::vector<int> neg(static_cast<std::size_t>(phi.dim()));
  for_each_mode(phi.box(), [&](std::span<const int> k, std::size_t i) {
    for (std::size_t j = 0; j < neg.size(); ++j) neg[j] = -k[j];
    out[out.box().index(neg)] = std::conj(phi[i]);
  });
  return out;
}

SpectralField multiply(const SpectralField& a, const SpectralField& b) {
  std::vector<int> cut(static_cast<std::size_t>(a.dim()));
  for (int j = 0; j < a.dim(); ++j) {
    cut[static_cast<std::size_t>(j)] = a.box().cutoff()[j] + b.box().cutoff()[j];
  }
  return multiply(a, b, ModeBox(std::move(cut)));
}

SpectralField multiply(const SpectralField& a, const SpectralField& b,
                       const ModeBox& out_box) {
  if (a.dim() != b.dim() || a.dim() != out_box.dim()) {
    throw std::invalid_argument("multiply: dimension mismatch");
  }
  const int d = a.dim();
  // Grid large enough that no retained mode aliases: M > out + band(a) + band(b).
  std::vector<int> dims(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    dims[static_cast<std::size_t>(j)] = detail::fast_grid_size(
        out_box.cutoff()[j] + a.box().cutoff()[j] + b.box().cutoff()[j] + 1);
  }
  std::size_t total = 1;
  for (int m : dims) total *= static_cast<std::size_t>(m);

  std::vector<Complex> ga(total, Complex{0.0, 0.0});
  std::vector<Complex> gb(total, Complex{0.0, 0.0});
  for_each_mode(a.box(), [&](std::span<const int> k, std::size_t i) {
    ga[grid_index(k, dims)] = a[i];
  });
  for_each_mode(b.box(), [&](std::span<const int> k, std::size_t i) {
    gb[grid_index(k, dims)] = b[i];
  });
  detail::dft_synthesis(ga, dims);
  detail::dft_synthesis(gb, dims);
  for (std::size_t i = 0; i < total; ++i) ga[i] *= gb[i];
  detail::dft_analysis(ga, dims);

  SpectralField out(out_box);
  for_each_mode(out_box, [&](std::span<const int> k, std::size_t i) {
    out[i] = ga[grid_index(k, dims)];
  });
  return out;
}

SpectralField steklov(const SpectralField& phi, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("steklov: eps must be positive");
  SpectralField out(phi.box());
  for_each_mode(phi.box(), [&](std::span<const int> k, std::size_t i) {
    out[i] = steklov_symbol(k, eps) * phi[i];
  });
  return out;
}

Complex inner(const SpectralField& a, const SpectralField& b) {
  // Coefficients outside either box are zero: sum over the intersection.
  Complex s{0.0, 0.0};
  const ModeBox& small = a.num_modes() <= b.num_modes() ? a.box() : b.box();
  for_each_mode(small, [&](std::span<const int> k, std::size_t) {
    s += std::conj(a.coefficient(k)) * b.coefficient(k);
  });
  return s;
}

double norm_l2(const SpectralField& phi) {
  double s = 0.0;
  for (const Complex& c : phi.coeffs()) s += std::norm(c);
  return std::sqrt(s);
}

Norms norms(const SpectralField& phi, int m) {
  double l2 = 0.0, hm = 0.0, hn = 0.0;
  for_each_mode(phi.box(), [&](std::span<const int> k, std::size_t i) {
    double p = std::norm(phi[i]);
    double w = sobolev_weight(k, m);
    l2 += p;
    hm += w * p;
    hn += p / w;
  });
  return Norms{std::sqrt(l2), std::sqrt(hm), std::sqrt(hn)};
}

double norm_hm(const SpectralField& phi, int m) { return norms(phi, m).hm; }
double norm_h_negative(const SpectralField& phi, int m) { return norms(phi, m).h_negative; }

std::vector<Complex> sample_grid(const SpectralField& phi, std::span<const int> dims) {
  std::size_t total = 1;
  for (int m : dims) total *= static_cast<std::size_t>(m);
  std::vector<Complex> grid(total, Complex{0.0, 0.0});
  for_each_mode(phi.box(), [&](std::span<const int> k, std::size_t i) {
    grid[grid_index(k, dims)] += phi[i];
  });
  detail::dft_synthesis(grid, dims);
  return grid;
}

SpectralField field_from_samples(std::span<const Complex> samples,
                                 std::span<const int> dims, const ModeBox& box) {
  std::vector<Complex> grid(samples.begin(), samples.end());
  detail::dft_analysis(grid, dims);
  SpectralField out(box);
  for_each_mode(box, [&](std::span<const int> k, std::size_t i) {
    out[i] = grid[grid_index(k, dims)];
  });
  return out;
}

double max_abs_on_grid(const SpectralField& phi, std::span<const int> dims) {
  auto grid = sample_grid(phi, dims);
  double m = 0.0;
  for (const Complex& c : grid) m = std::max(m, std::abs(c));
  return m;
}

VectorField::VectorField(int n, ModeBox box) {
  if (n < 1) throw std::invalid_argument("VectorField needs n >= 1");
  comp_.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) comp_.emplace_back(box);
}

VectorField::VectorField(std::vector<SpectralField> components)
    : comp_(std::move(components)) {
  if (comp_.empty()) throw std::invalid_argument("VectorField needs n >= 1");
  for (const auto& c : comp_) require_same_box(c.box(), comp_.front().box(), "VectorField");
}

VectorField& VectorField::operator+=(const VectorField& other) {
  for (int j = 0; j < components(); ++j) comp_[static_cast<std::size_t>(j)] += other[j];
  return *this;
}

VectorField& VectorField::operator-=(const VectorField& other) {
  for (int j = 0; j < components(); ++j) comp_[static_cast<std::size_t>(j)] -= other[j];
  return *this;
}

VectorField& VectorField::operator*=(Complex s) {
  for (auto& c : comp_) c *= s;
  return *this;
}

VectorField operator+(const VectorField& a, const VectorField& b) {
  std::vector<SpectralField> c;
  for (int j = 0; j < a.components(); ++j) c.push_back(a[j] + b[j]);
  return VectorField(std::move(c));
}

VectorField operator-(const VectorField& a, const VectorField& b) {
  std::vector<SpectralField> c;
  for (int j = 0; j < a.components(); ++j) c.push_back(a[j] - b[j]);
  return VectorField(std::move(c));
}

VectorField operator*(Complex s, const VectorField& a) {
  VectorField out = a;
  out *= s;
  return out;
}

VectorField resized(const VectorField& u, const ModeBox& box) {
  std::vector<SpectralField> c;
  for (int j = 0; j < u.components(); ++j) c.push_back(resized(u[j], box));
  return VectorField(std::move(c));
}

VectorField derivative(const VectorField& u, const MultiIndex& alpha) {
  std::vector<SpectralField> c;
  for (int j = 0; j < u.components(); ++j) c.push_back(derivative(u[j], alpha));
  return VectorField(std::move(c));
}

VectorField rescale(const VectorField& u, int K) {
  std::vector<SpectralField> c;
  for (int j = 0; j < u.components(); ++j) c.push_back(rescale(u[j], K));
  return VectorField(std::move(c));
}

VectorField steklov(const VectorField& u, double eps) {
  std::vector<SpectralField> c;
  for (int j = 0; j < u.components(); ++j) c.push_back(steklov(u[j], eps));
  return VectorField(std::move(c));
}

Complex inner(const VectorField& a, const VectorField& b) {
  Complex s{0.0, 0.0};
  for (int j = 0; j < a.components(); ++j) s += inner(a[j], b[j]);
  return s;
}

double norm_l2(const VectorField& u) {
  double s = 0.0;
  for (int j = 0; j < u.components(); ++j) {
    double t = norm_l2(u[j]);
    s += t * t;
  }
  return std::sqrt(s);
}

Norms norms(const VectorField& u, int m) {
  Norms acc{0.0, 0.0, 0.0};
  for (int j = 0; j < u.components(); ++j) {
    Norms nj = norms(u[j], m);
    acc.l2 += nj.l2 * nj.l2;
    acc.hm += nj.hm * nj.hm;
    acc.h_negative += nj.h_negative * nj.h_negative;
  }
  return Norms{std::sqrt(acc.l2), std::sqrt(acc.hm), std::sqrt(acc.h_negative)};
}

double norm_hm(const VectorField& u, int m) { return norms(u, m).hm; }
double norm_h_negative(const VectorField& u, int m) { return norms(u, m).h_negative; }

FieldArray::FieldArray(std::vector<MultiIndex> indices, int n, const ModeBox& box)
    : indices_(std::move(indices)) {
  if (indices_.empty()) throw std::invalid_argument("FieldArray needs at least one slot");
  entries_.reserve(indices_.size());
  for (std::size_t i = 0; i < indices_.size(); ++i) entries_.emplace_back(n, box);
}

FieldArray gradient_array(const VectorField& phi, int m) {
  FieldArray out(enumerate_multiindices(m, phi.box().dim()), phi.components(), phi.box());
  for (int a = 0; a < out.slots(); ++a) out.at(a) = derivative(phi, out.index_at(a));
  return out;
}

Complex inner(const FieldArray& a, const FieldArray& b) {
  Complex s{0.0, 0.0};
  for (int i = 0; i < a.slots(); ++i) s += inner(a.at(i), b.at(i));
  return s;
}

double norm_l2(const FieldArray& a) {
  double s = 0.0;
  for (int i = 0; i < a.slots(); ++i) {
    double t = norm_l2(a.at(i));
    s += t * t;
  }
  return std::sqrt(s);
}

FieldArray steklov(const FieldArray& a, double eps) {
  FieldArray out = a;
  for (int i = 0; i < out.slots(); ++i) out.at(i) = steklov(out.at(i), eps);
  return out;
}

}  // namespace hihomog
