#include "hihomog/coefficients.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "hihomog/detail/operator_kernel.hpp"
#include "hihomog/krylov.hpp"

namespace hihomog {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::map<std::string, double> parse_params(const std::string& text) {
  std::map<std::string, double> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t comma = text.find(',', pos);
    std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    std::size_t eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw std::invalid_argument("builtin parameter item '" + item + "' is not key=value");
    }
    out[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

double get_param(const std::map<std::string, double>& p, const std::string& key, double dflt) {
  auto it = p.find(key);
  return it == p.end() ? dflt : it->second;
}

int get_int(const std::map<std::string, double>& p, const std::string& key, int dflt) {
  return static_cast<int>(std::lround(get_param(p, key, dflt)));
}

// 1/(2 + cos(2 pi y)) has the geometric Fourier series
// (1/sqrt(3)) * (-(2 - sqrt(3)))^{|k|}.
SpectralField harmonic_profile(int band) {
  const double r = 2.0 - std::sqrt(3.0);
  SpectralField f(ModeBox::uniform(1, band));
  for (int k = -band; k <= band; ++k) {
    double c = std::pow(-r, std::abs(k)) / std::sqrt(3.0);
    int kk[1] = {k};
    f.set_coefficient(kk, Complex{c, 0.0});
  }
  return f;
}

// cos(2 pi y1) + sin(4 pi y1) lifted to d = 2 (varies along the first axis).
SpectralField skew_profile() {
  SpectralField f(ModeBox(std::vector<int>{2, 0}));
  int k1[2] = {1, 0}, k1m[2] = {-1, 0}, k2[2] = {2, 0}, k2m[2] = {-2, 0};
  f.set_coefficient(k1, Complex{0.5, 0.0});
  f.set_coefficient(k1m, Complex{0.5, 0.0});
  f.set_coefficient(k2, Complex{0.0, -0.5});
  f.set_coefficient(k2m, Complex{0.0, 0.5});
  return f;
}

MatrixField scalar_block(const SpectralField& f) {
  MatrixField b(1, f.box());
  b.at(0, 0) = f;
  return b;
}

MatrixField identity_block(int n, int d, Complex scale) {
  MatrixField b(n, ModeBox::uniform(d, 0));
  for (int j = 0; j < n; ++j) b.at(j, j) = SpectralField::constant(d, scale);
  return b;
}

double min_real_on_grid(const SpectralField& f, const std::vector<int>& dims) {
  auto g = sample_grid(f, dims);
  double m = g.empty() ? 0.0 : g[0].real();
  for (const Complex& c : g) m = std::min(m, c.real());
  return m;
}

}  // namespace

MatrixField::MatrixField(int n, const ModeBox& box) : n_(n) {
  if (n < 1) throw std::invalid_argument("MatrixField needs n >= 1");
  e_.reserve(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n * n; ++i) e_.emplace_back(box);
}

CoefficientArray::CoefficientArray(IndexBasis basis, double lambda0, double lambda1)
    : basis_(std::move(basis)), lambda0_(lambda0), lambda1_(lambda1) {
  blocks_.resize(static_cast<std::size_t>(basis_.size()) * static_cast<std::size_t>(basis_.size()));
}

bool CoefficientArray::has_block(int a, int b) const {
  return blocks_[static_cast<std::size_t>(a * basis_.size() + b)].has_value();
}

const MatrixField& CoefficientArray::block(int a, int b) const {
  const auto& blk = blocks_[static_cast<std::size_t>(a * basis_.size() + b)];
  if (!blk) throw std::out_of_range("CoefficientArray: block is structurally zero");
  return *blk;
}

void CoefficientArray::set_block(int a, int b, MatrixField field) {
  if (field.components() != basis_.components()) {
    throw std::invalid_argument("CoefficientArray: block has wrong component count");
  }
  blocks_[static_cast<std::size_t>(a * basis_.size() + b)] = std::move(field);
}

std::vector<int> CoefficientArray::band() const {
  std::vector<int> band(static_cast<std::size_t>(basis_.dim()), 0);
  const int n = basis_.components();
  for (const auto& blk : blocks_) {
    if (!blk) continue;
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const auto& cut = blk->at(j, k).box().cutoff();
        for (std::size_t ax = 0; ax < band.size(); ++ax) band[ax] = std::max(band[ax], cut[ax]);
      }
    }
  }
  return band;
}

bool CoefficientArray::is_real(double tol) const {
  const int n = basis_.components();
  for (const auto& blk : blocks_) {
    if (!blk) continue;
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const SpectralField& f = blk->at(j, k);
        SpectralField diff = f - conjugated(f);
        if (norm_l2(diff) > tol * (1.0 + norm_l2(f))) return false;
      }
    }
  }
  return true;
}

double CoefficientArray::linf_estimate() const {
  const int n = basis_.components();
  const int mbar = basis_.size();
  std::vector<int> b = band();
  std::vector<int> dims(b.size());
  for (std::size_t j = 0; j < b.size(); ++j) dims[j] = 4 * b[j] + 9;
  std::size_t total = 1;
  for (int m : dims) total *= static_cast<std::size_t>(m);

  // pointwise spectral norm of the (mbar n) x (mbar n) block matrix
  std::vector<std::vector<Complex>> grids(static_cast<std::size_t>(mbar * mbar * n * n));
  for (int a = 0; a < mbar; ++a) {
    for (int bb = 0; bb < mbar; ++bb) {
      if (!has_block(a, bb)) continue;
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          grids[static_cast<std::size_t>(((a * mbar + bb) * n + j) * n + k)] =
              sample_grid(block(a, bb).at(j, k), dims);
        }
      }
    }
  }
  double worst = 0.0;
  Eigen::MatrixXcd M(mbar * n, mbar * n);
  for (std::size_t i = 0; i < total; ++i) {
    M.setZero();
    for (int a = 0; a < mbar; ++a) {
      for (int bb = 0; bb < mbar; ++bb) {
        for (int j = 0; j < n; ++j) {
          for (int k = 0; k < n; ++k) {
            const auto& g =
                grids[static_cast<std::size_t>(((a * mbar + bb) * n + j) * n + k)];
            if (!g.empty()) M(a * n + j, bb * n + k) = g[i];
          }
        }
      }
    }
    worst = std::max(worst, M.jacobiSvd().singularValues()(0));
  }
  return worst;
}

CoefficientArray adjoint(const CoefficientArray& A) {
  const int mbar = A.basis().size();
  const int n = A.basis().components();
  CoefficientArray out(A.basis(), A.lambda0(), A.lambda1());
  for (int a = 0; a < mbar; ++a) {
    for (int b = 0; b < mbar; ++b) {
      if (!A.has_block(b, a)) continue;
      const MatrixField& src = A.block(b, a);
      MatrixField dst(n, src.at(0, 0).box());
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) dst.at(j, k) = conjugated(src.at(k, j));
      }
      out.set_block(a, b, std::move(dst));
    }
  }
  out.set_family(A.family().empty() ? "" : A.family() + "_adjoint");
  return out;
}

CoercivityEstimate check_coercivity(const CoefficientArray& A, int sample_cutoff) {
  const int d = A.basis().dim();
  const int m = A.basis().m();
  const int n = A.basis().components();
  const int mbar = A.basis().size();

  // Hermitian part of the form is the operator with array (A + A*)/2.
  const CoefficientArray Astar = adjoint(A);
  CoefficientArray herm(A.basis(), A.lambda0(), A.lambda1());
  for (int a = 0; a < mbar; ++a) {
    for (int b = 0; b < mbar; ++b) {
      if (!A.has_block(a, b) && !Astar.has_block(a, b)) continue;
      ModeBox box = ModeBox::uniform(A.basis().dim(), 0);
      for (const CoefficientArray* src : {&A, &Astar}) {
        if (!src->has_block(a, b)) continue;
        for (int j = 0; j < n; ++j) {
          for (int k = 0; k < n; ++k) box = hull(box, src->block(a, b).at(j, k).box());
        }
      }
      MatrixField blk(n, box);
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          SpectralField f(box);
          if (A.has_block(a, b)) f += resized(A.block(a, b).at(j, k), box);
          if (Astar.has_block(a, b)) f += resized(Astar.block(a, b).at(j, k), box);
          f *= Complex{0.5, 0.0};
          blk.at(j, k) = f;
        }
      }
      herm.set_block(a, b, std::move(blk));
    }
  }

  ModeBox box = ModeBox::uniform(d, sample_cutoff);
  detail::DivFormKernel kernel(herm, box, 1);
  const std::size_t size = kernel.vector_size();
  const std::size_t box_size = box.size();

  // weight sqrt(S(k)) with S = sum_{|a|=m} (2 pi k)^{2a}; zero mode masked
  std::vector<double> shalf(box_size, 0.0);
  for_each_mode(box, [&](std::span<const int> k, std::size_t i) {
    double s = sobolev_weight(k, m) - 1.0;
    shalf[i] = s > 0.0 ? std::sqrt(s) : 0.0;
  });

  auto scaled_apply = [&](std::span<const Complex> x, std::span<Complex> y) {
    std::vector<Complex> z(size);
    for (int j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < box_size; ++i) {
        std::size_t idx = static_cast<std::size_t>(j) * box_size + i;
        z[idx] = shalf[i] > 0.0 ? x[idx] / shalf[i] : Complex{0.0, 0.0};
      }
    }
    kernel.apply_div_form(z, y);
    for (int j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < box_size; ++i) {
        std::size_t idx = static_cast<std::size_t>(j) * box_size + i;
        y[idx] = shalf[i] > 0.0 ? y[idx] / shalf[i] : Complex{0.0, 0.0};
      }
    }
  };
  auto identity = [](std::span<const Complex> x, std::span<Complex> y) {
    std::copy(x.begin(), x.end(), y.begin());
  };

  // deterministic start, zero mean
  std::mt19937_64 rng(0x5eed5eedULL);
  std::normal_distribution<double> dist;
  std::vector<Complex> v(size);
  for (int j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < box_size; ++i) {
      std::size_t idx = static_cast<std::size_t>(j) * box_size + i;
      v[idx] = shalf[i] > 0.0 ? Complex{dist(rng), dist(rng)} : Complex{0.0, 0.0};
    }
  }
  double nv = 0.0;
  for (const Complex& c : v) nv += std::norm(c);
  nv = std::sqrt(nv);
  for (Complex& c : v) c /= nv;

  CoercivityEstimate est;
  std::vector<Complex> w(size), cv(size);
  double lambda = 0.0;
  for (int it = 0; it < 60; ++it) {
    KrylovOptions opt;
    opt.tol = 1e-11;
    opt.max_iterations = 400;
    opt.restart = 80;
    std::fill(w.begin(), w.end(), Complex{0.0, 0.0});
    gmres([&](std::span<const Complex> x, std::span<Complex> y) { scaled_apply(x, y); },
          identity, v, w, opt);
    double nw = 0.0;
    for (const Complex& c : w) nw += std::norm(c);
    nw = std::sqrt(nw);
    if (nw == 0.0) break;
    for (Complex& c : w) c /= nw;
    scaled_apply(w, cv);
    Complex rq{0.0, 0.0};
    for (std::size_t i = 0; i < size; ++i) rq += std::conj(w[i]) * cv[i];
    double lambda_new = rq.real();
    est.iterations = it + 1;
    double res = 0.0;
    for (std::size_t i = 0; i < size; ++i) res += std::norm(cv[i] - lambda_new * w[i]);
    est.residual = std::sqrt(res);
    v = w;
    bool settled = it > 0 && std::abs(lambda_new - lambda) <= 1e-12 * std::abs(lambda_new);
    lambda = lambda_new;
    if (settled && est.residual <= 1e-9 * std::max(1.0, std::abs(lambda))) break;
  }
  est.value = lambda;
  est.positive = lambda > 0.0;
  return est;
}

CoefficientArray builtin_coefficients(const std::string& name,
                                      const std::map<std::string, double>& params) {
  if (name == "constant") {
    int d = get_int(params, "d", 1);
    int m = get_int(params, "m", 1);
    int n = get_int(params, "n", 1);
    Complex v{get_param(params, "value_re", 1.0), get_param(params, "value_im", 0.0)};
    if (v.real() <= 0.0) throw std::invalid_argument("builtin constant: Re(value) must be positive");
    IndexBasis basis(m, d, n);
    CoefficientArray A(basis, v.real(), std::abs(v));
    for (int a = 0; a < basis.size(); ++a) A.set_block(a, a, identity_block(n, d, v));
    A.set_family("constant");
    return A;
  }
  if (name == "harmonic") {
    int m = get_int(params, "m", 1);
    int band = get_int(params, "band", 24);
    if (band < 4 || band > 64) throw std::invalid_argument("builtin harmonic: band in [4,64]");
    IndexBasis basis(m, 1, 1);
    CoefficientArray A(basis, 1.0 / 3.0, 1.0);
    A.set_block(0, 0, scalar_block(harmonic_profile(band)));
    A.set_family("harmonic");
    return A;
  }
  if (name == "separable") {
    int m = get_int(params, "m", 2);
    int band = get_int(params, "band", 1);
    double rho = get_param(params, "rho", 0.25);
    if (band < 1 || band > 4) throw std::invalid_argument("builtin separable: band in [1,4]");
    SpectralField fx(ModeBox(std::vector<int>{band, 0}));
    SpectralField fy(ModeBox(std::vector<int>{0, band}));
    {
      std::vector<int> k(2, 0);
      fx.set_coefficient(k, Complex{1.0, 0.0});
      fy.set_coefficient(k, Complex{1.0, 0.0});
      for (int p = 1; p <= band; ++p) {
        double c = rho / (p * p);
        for (int sgn : {-1, 1}) {
          k = {sgn * p, 0};
          fx.set_coefficient(k, Complex{c, 0.0});
          k = {0, sgn * p};
          fy.set_coefficient(k, Complex{c, 0.0});
        }
      }
    }
    SpectralField a = multiply(fx, fy);
    double fmin = min_real_on_grid(fx, std::vector<int>{4096, 1});
    double fmax = max_abs_on_grid(fx, std::vector<int>{4096, 1});
    if (fmin < 0.05) throw std::invalid_argument("builtin separable: rho leaves no coercivity margin");
    IndexBasis basis(m, 2, 1);
    CoefficientArray A(basis, fmin * fmin, fmax * fmax);
    for (int s = 0; s < basis.size(); ++s) A.set_block(s, s, scalar_block(a));
    A.set_family("separable");
    return A;
  }
  if (name == "nonsym") {
    int d = get_int(params, "d", 2);
    int m = get_int(params, "m", 2);
    double rho = get_param(params, "rho", 0.3);
    if (std::abs(rho) > 0.4) throw std::invalid_argument("builtin nonsym: |rho| <= 0.4");
    IndexBasis basis(m, d, 2);
    // cos(2 pi y1)
    std::vector<int> cut(static_cast<std::size_t>(d), 0);
    cut[0] = 1;
    SpectralField c((ModeBox(cut)));
    {
      std::vector<int> k(static_cast<std::size_t>(d), 0);
      k[0] = 1;
      c.set_coefficient(k, Complex{0.5, 0.0});
      k[0] = -1;
      c.set_coefficient(k, Complex{0.5, 0.0});
    }
    CoefficientArray A(basis, 1.0, std::sqrt(1.0 + rho * rho));
    for (int s = 0; s < basis.size(); ++s) {
      MatrixField blk(2, c.box());
      blk.at(0, 0) = resized(SpectralField::constant(d, Complex{1.0, 0.0}), c.box());
      blk.at(1, 1) = blk.at(0, 0);
      blk.at(0, 1) = Complex{-rho, 0.0} * c;  // rho * cos * J, J = [[0,-1],[1,0]]
      blk.at(1, 0) = Complex{rho, 0.0} * c;
      A.set_block(s, s, std::move(blk));
    }
    A.set_family("nonsym");
    return A;
  }
  if (name == "complex") {
    int d = get_int(params, "d", 1);
    int m = get_int(params, "m", 1);
    double rho = get_param(params, "rho", 0.3);
    if (std::abs(rho) > 0.4) throw std::invalid_argument("builtin complex: |rho| <= 0.4");
    std::vector<int> cut(static_cast<std::size_t>(d), 0);
    cut[0] = 1;
    SpectralField a((ModeBox(cut)));
    {
      std::vector<int> k(static_cast<std::size_t>(d), 0);
      a.set_coefficient(k, Complex{1.0, 0.0});
      k[0] = 1;
      a.set_coefficient(k, Complex{rho, 0.0});  // 1 + rho e^{2 pi i y1}
    }
    IndexBasis basis(m, d, 1);
    CoefficientArray A(basis, 1.0 - std::abs(rho), 1.0 + std::abs(rho));
    for (int s = 0; s < basis.size(); ++s) A.set_block(s, s, scalar_block(a));
    A.set_family("complex");
    return A;
  }
  if (name == "skew") {
    int m = get_int(params, "m", 2);
    double rho = get_param(params, "rho", 0.6);
    if (std::abs(rho) > 1.0) throw std::invalid_argument("builtin skew: |rho| <= 1.0");
    IndexBasis basis(m, 2, 1);
    SpectralField c = skew_profile();
    int p = basis.position(MultiIndex{m - 1, 1});
    int q = basis.position(MultiIndex{m, 0});
    if (p < 0 || q < 0) throw std::logic_error("skew: slot lookup failed");
    double cmax = max_abs_on_grid(c, std::vector<int>{4096, 1});
    // skew (alpha,beta) coupling has zero Hermitian part: lambda0 = 1 exactly
    CoefficientArray A(basis, 1.0, std::sqrt(1.0 + rho * rho * cmax * cmax));
    for (int s = 0; s < basis.size(); ++s) {
      A.set_block(s, s, scalar_block(SpectralField::constant(2, Complex{1.0, 0.0})));
    }
    A.set_block(p, q, scalar_block(Complex{rho, 0.0} * c));
    A.set_block(q, p, scalar_block(Complex{-rho, 0.0} * c));
    A.set_family("skew");
    return A;
  }
  throw std::invalid_argument("unknown builtin coefficient family '" + name + "'");
}

CoefficientArray builtin_coefficients_spec(const std::string& spec) {
  std::size_t colon = spec.find(':');
  std::string name = spec.substr(0, colon);
  std::map<std::string, double> params;
  if (colon != std::string::npos && colon + 1 < spec.size()) {
    params = parse_params(spec.substr(colon + 1));
  }
  return builtin_coefficients(name, params);
}

}  // namespace hihomog
