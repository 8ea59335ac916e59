#include "hihomog/cell.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "hihomog/detail/operator_kernel.hpp"

namespace hihomog {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double real_power(std::span<const int> k, const MultiIndex& alpha) {
  double p = 1.0;
  for (int j = 0; j < alpha.dim(); ++j) {
    for (int q = 0; q < alpha[j]; ++q) p *= kTwoPi * k[static_cast<std::size_t>(j)];
  }
  return p;
}

ModeBox widened(const ModeBox& box, std::span<const int> extra) {
  std::vector<int> cut(box.cutoff());
  for (std::size_t j = 0; j < cut.size(); ++j) cut[j] += extra[j];
  return ModeBox(std::move(cut));
}

// e_{gamma b} e^k as a constant field array: the right-hand-side data of the
// cell problem and the uncorrected part of the flux.
FieldArray unit_array(const IndexBasis& basis, int b, int k, const ModeBox& box) {
  FieldArray V(basis.list(), basis.components(), box);
  std::vector<int> zero(static_cast<std::size_t>(basis.dim()), 0);
  V.at(b)[k].set_coefficient(zero, Complex{1.0, 0.0});
  return V;
}

// The corrected gradient array e_{gamma b} e^k + D^gamma N^k_b.
FieldArray corrected_gradient(const IndexBasis& basis, const VectorField& N, int b, int k) {
  FieldArray V = unit_array(basis, b, k, N.box());
  for (int g = 0; g < basis.size(); ++g) {
    VectorField dN = derivative(N, basis.at(g));
    V.at(g) += dN;
  }
  return V;
}

struct CellContext {
  const CoefficientArray& A;
  detail::DivFormKernel kernel;
  std::vector<double> precond_weight;  // 1 / (lambda0 * S(k)), 1 at k = 0

  CellContext(const CoefficientArray& A_, const ModeBox& box, const ModeBox& flux_box)
      : A(A_), kernel(A_, box, 1, flux_box) {
    const int m = A.basis().m();
    double lambda0 = A.lambda0() > 0.0 ? A.lambda0() : 1.0;
    precond_weight.resize(box.size());
    for_each_mode(box, [&](std::span<const int> k, std::size_t i) {
      double s = sobolev_weight(k, m) - 1.0;
      precond_weight[i] = s > 0.0 ? 1.0 / (lambda0 * s) : 1.0;
    });
  }

  void precondition(std::span<const Complex> r, std::span<Complex> z) const {
    const std::size_t bs = kernel.box().size();
    const int n = A.basis().components();
    for (int j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < bs; ++i) {
        z[static_cast<std::size_t>(j) * bs + i] =
            precond_weight[i] * r[static_cast<std::size_t>(j) * bs + i];
      }
    }
  }
};

// Solve one cell problem; N and the record are written in place.
CellSolveRecord solve_one(const CellContext& ctx, int k, int g, VectorField& N,
                          const KrylovOptions& krylov) {
  const IndexBasis& basis = ctx.A.basis();
  const ModeBox& box = ctx.kernel.box();
  const std::size_t size = ctx.kernel.vector_size();
  const std::size_t bs = box.size();
  const int n = basis.components();

  // rhs = -sum_alpha conj((2 pi i k)^alpha) [A_{alpha gamma} e^k]^(kappa),
  // matching the sign convention of the kernel's divergence form
  FieldArray W = ctx.kernel.apply_blocks(unit_array(basis, g, k, box), box);
  std::vector<Complex> rhs(size, Complex{0.0, 0.0});
  for (int a = 0; a < basis.size(); ++a) {
    const MultiIndex& alpha = basis.at(a);
    for (int j = 0; j < n; ++j) {
      const SpectralField& w = W.at(a)[j];
      for_each_mode(box, [&](std::span<const int> kk, std::size_t i) {
        rhs[static_cast<std::size_t>(j) * bs + i] -=
            std::conj(derivative_symbol(kk, alpha)) * w[i];
      });
    }
  }

  std::vector<Complex> x(size, Complex{0.0, 0.0});
  KrylovResult res = gmres(
      [&](std::span<const Complex> u, std::span<Complex> y) { ctx.kernel.apply_div_form(u, y); },
      [&](std::span<const Complex> r, std::span<Complex> z) { ctx.precondition(r, z); },
      rhs, x, krylov);

  N = detail::unflatten(x, n, box);

  CellSolveRecord record;
  record.component = k;
  record.gamma = basis.at(g);
  record.krylov = res;
  double gn = 0.0;
  const int m = basis.m();
  for (int j = 0; j < n; ++j) {
    for_each_mode(box, [&](std::span<const int> kk, std::size_t i) {
      gn += (sobolev_weight(kk, m) - 1.0) * std::norm(N[j][i]);
    });
  }
  record.grad_norm = std::sqrt(gn);
  return record;
}

void require_converged(const std::vector<CellSolveRecord>& records) {
  for (const auto& r : records) {
    if (!r.krylov.converged) {
      throw std::runtime_error(
          "cell solve did not converge (component " + std::to_string(r.component) +
          ", gamma " + r.gamma.str() + ", residual " +
          std::to_string(r.krylov.relative_residual) + ")");
    }
  }
}

}  // namespace

EffectiveTensor::EffectiveTensor(IndexBasis basis) : basis_(std::move(basis)) {
  const int mbar = basis_.size();
  const int n = basis_.components();
  blocks_.assign(static_cast<std::size_t>(mbar * mbar), Eigen::MatrixXcd::Zero(n, n));
}

Eigen::MatrixXcd& EffectiveTensor::block(int a, int b) {
  return blocks_[static_cast<std::size_t>(a * basis_.size() + b)];
}

const Eigen::MatrixXcd& EffectiveTensor::block(int a, int b) const {
  return blocks_[static_cast<std::size_t>(a * basis_.size() + b)];
}

Eigen::MatrixXcd EffectiveTensor::symbol(std::span<const int> k) const {
  const int n = basis_.components();
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(n, n);
  for (int a = 0; a < basis_.size(); ++a) {
    for (int b = 0; b < basis_.size(); ++b) {
      double p = real_power(k, basis_.at(a)) * real_power(k, basis_.at(b));
      s += p * block(a, b);
    }
  }
  return s;
}

EffectiveTensor EffectiveTensor::adjointed() const {
  EffectiveTensor out(basis_);
  for (int a = 0; a < basis_.size(); ++a) {
    for (int b = 0; b < basis_.size(); ++b) out.block(a, b) = block(b, a).adjoint();
  }
  return out;
}

double EffectiveTensor::max_abs() const {
  double m = 0.0;
  for (const auto& b : blocks_) m = std::max(m, b.cwiseAbs().maxCoeff());
  return m;
}

double distance(const EffectiveTensor& a, const EffectiveTensor& b) {
  double m = 0.0;
  for (int i = 0; i < a.basis().size(); ++i) {
    for (int j = 0; j < a.basis().size(); ++j) {
      m = std::max(m, (a.block(i, j) - b.block(i, j)).cwiseAbs().maxCoeff());
    }
  }
  return m;
}

const VectorField& CellData::corrector(int k, int g) const {
  return correctors[static_cast<std::size_t>(g * basis.components() + k)];
}

const VectorField& CellData::adjoint_corrector(int k, int g) const {
  return adjoint_correctors[static_cast<std::size_t>(g * basis.components() + k)];
}

const VectorField& CellData::flux_field(int k, int a, int b) const {
  return flux[static_cast<std::size_t>((k * basis.size() + a) * basis.size() + b)];
}

const VectorField& CellData::adjoint_flux_field(int k, int a, int b) const {
  return adjoint_flux[static_cast<std::size_t>((k * basis.size() + a) * basis.size() + b)];
}

FieldArray CellData::flux_column(int k, int b) const {
  FieldArray out(basis.list(), basis.components(), flux_box);
  for (int a = 0; a < basis.size(); ++a) out.at(a) = flux_field(k, a, b);
  return out;
}

FieldArray CellData::adjoint_flux_column(int k, int b) const {
  FieldArray out(basis.list(), basis.components(), flux_box);
  for (int a = 0; a < basis.size(); ++a) out.at(a) = adjoint_flux_field(k, a, b);
  return out;
}

std::vector<int> default_cell_cutoff(const CoefficientArray& A) {
  std::vector<int> band = A.band();
  std::vector<int> cut(band.size());
  for (std::size_t j = 0; j < band.size(); ++j) cut[j] = band[j] > 0 ? 4 * band[j] + 2 : 0;
  return cut;
}

CellData solve_correctors(const CoefficientArray& A, const CellSolveOptions& opt) {
  const IndexBasis& basis = A.basis();
  std::vector<int> cut = opt.cutoff.empty() ? default_cell_cutoff(A) : opt.cutoff;
  std::vector<int> band = A.band();
  for (std::size_t j = 0; j < band.size(); ++j) {
    if (cut[j] < band[j]) {
      throw std::invalid_argument("cell cutoff must be >= the coefficient band");
    }
  }
  ModeBox box((std::vector<int>(cut)));
  ModeBox flux_box = widened(box, band);

  CellData cell;
  cell.basis = basis;
  cell.box = box;
  cell.flux_box = flux_box;
  cell.tol = opt.krylov.tol;

  CellContext ctx(A, box, flux_box);
  const int n = basis.components();
  cell.correctors.assign(static_cast<std::size_t>(basis.size() * n), VectorField(n, box));
  for (int g = 0; g < basis.size(); ++g) {
    for (int k = 0; k < n; ++k) {
      VectorField& N = cell.correctors[static_cast<std::size_t>(g * n + k)];
      cell.records.push_back(solve_one(ctx, k, g, N, opt.krylov));
    }
  }
  require_converged(cell.records);
  return cell;
}

EffectiveTensor effective_tensor(const CoefficientArray& A, const CellData& cell) {
  const IndexBasis& basis = cell.basis;
  const int n = basis.components();
  CellContext ctx(A, cell.box, cell.flux_box);
  EffectiveTensor Ahat(basis);
  for (int b = 0; b < basis.size(); ++b) {
    for (int k = 0; k < n; ++k) {
      FieldArray W = ctx.kernel.apply_blocks(
          corrected_gradient(basis, cell.corrector(k, b), b, k), cell.flux_box);
      for (int a = 0; a < basis.size(); ++a) {
        for (int j = 0; j < n; ++j) Ahat.block(a, b)(j, k) = W.at(a)[j].mean();
      }
    }
  }
  return Ahat;
}

std::vector<VectorField> flux_remainder(const CoefficientArray& A, const CellData& cell,
                                        const EffectiveTensor& Ahat) {
  const IndexBasis& basis = cell.basis;
  const int n = basis.components();
  const int mbar = basis.size();
  CellContext ctx(A, cell.box, cell.flux_box);
  std::vector<int> zero(static_cast<std::size_t>(basis.dim()), 0);

  std::vector<VectorField> g(static_cast<std::size_t>(n * mbar * mbar),
                             VectorField(n, cell.flux_box));
  for (int b = 0; b < mbar; ++b) {
    for (int k = 0; k < n; ++k) {
      FieldArray W = ctx.kernel.apply_blocks(
          corrected_gradient(basis, cell.corrector(k, b), b, k), cell.flux_box);
      for (int a = 0; a < mbar; ++a) {
        VectorField& gk = g[static_cast<std::size_t>((k * mbar + a) * mbar + b)];
        gk = W.at(a);
        for (int j = 0; j < n; ++j) {
          // subtracting the mean realizes - Ahat e^k and pins <g> = 0 exactly
          gk[j].set_coefficient(zero, gk[j].mean() - Ahat.block(a, b)(j, k));
        }
      }
    }
  }
  return g;
}

CellData solve_all(const CoefficientArray& A, const CellSolveOptions& opt) {
  CellData cell = solve_correctors(A, opt);
  cell.effective = effective_tensor(A, cell);
  cell.flux = flux_remainder(A, cell, cell.effective);

  CoefficientArray Astar = adjoint(A);
  CellSolveOptions star_opt = opt;
  star_opt.cutoff = cell.box.cutoff();
  CellData star = solve_correctors(Astar, star_opt);
  star.effective = effective_tensor(Astar, star);
  star.flux = flux_remainder(Astar, star, star.effective);

  cell.has_adjoint = true;
  cell.adjoint_correctors = std::move(star.correctors);
  cell.adjoint_records = std::move(star.records);
  cell.adjoint_effective = star.effective;
  cell.adjoint_flux = std::move(star.flux);
  return cell;
}

double divergence_residual(const FieldArray& g) {
  const ModeBox& box = g.at(0).box();
  double scale = norm_l2(g);
  if (scale == 0.0) return 0.0;
  double worst = 0.0;
  for_each_mode(box, [&](std::span<const int> k, std::size_t i) {
    bool at_zero = true;
    for (int kj : k) at_zero = at_zero && kj == 0;
    if (at_zero) return;
    double pnorm2 = 0.0;
    double num2 = 0.0;
    for (int j = 0; j < g.components(); ++j) {
      Complex div{0.0, 0.0};
      for (int a = 0; a < g.slots(); ++a) {
        div += derivative_symbol(k, g.index_at(a)) * g.at(a)[j][i];
      }
      num2 += std::norm(div);
    }
    for (int a = 0; a < g.slots(); ++a) pnorm2 += std::norm(derivative_symbol(k, g.index_at(a)));
    if (pnorm2 > 0.0) worst = std::max(worst, std::sqrt(num2 / pnorm2) / scale);
  });
  return worst;
}

SymbolCheck check_symbol_positivity(const EffectiveTensor& Ahat, double lambda0,
                                    int samples, unsigned long seed) {
  const int d = Ahat.basis().dim();
  const int m = Ahat.basis().m();
  const int n = Ahat.basis().components();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> kdist(-8, 8);
  std::normal_distribution<double> xdist;

  SymbolCheck check;
  check.samples = samples;
  check.worst_margin = 1e300;
  for (int s = 0; s < samples; ++s) {
    std::vector<int> k(static_cast<std::size_t>(d), 0);
    bool zero = true;
    while (zero) {
      for (int j = 0; j < d; ++j) {
        k[static_cast<std::size_t>(j)] = kdist(rng);
      }
      zero = true;
      for (int j = 0; j < d; ++j) zero = zero && k[static_cast<std::size_t>(j)] == 0;
    }
    Eigen::VectorXcd xi(n);
    for (int j = 0; j < n; ++j) xi(j) = Complex{xdist(rng), xdist(rng)};
    double S = sobolev_weight(k, m) - 1.0;
    double quad = (xi.adjoint() * Ahat.symbol(k) * xi).real()(0);
    double floor = lambda0 * S * xi.squaredNorm();
    check.worst_margin = std::min(check.worst_margin, (quad - floor) / (S * xi.squaredNorm()));
  }
  check.passed = check.worst_margin >= -1e-10;
  return check;
}

}  // namespace hihomog
