#include "hihomog/krylov.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace hihomog {

namespace {

Complex dot(std::span<const Complex> a, std::span<const Complex> b) {
  Complex s{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

double nrm2(std::span<const Complex> a) {
  double s = 0.0;
  for (const Complex& c : a) s += std::norm(c);
  return std::sqrt(s);
}

void axpy(Complex alpha, std::span<const Complex> x, std::span<Complex> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace

KrylovResult gmres(const LinearOp& op, const LinearOp& precond,
                   std::span<const Complex> rhs, std::span<Complex> x,
                   const KrylovOptions& options) {
  const std::size_t n = rhs.size();
  if (x.size() != n) throw std::invalid_argument("gmres: size mismatch");
  const int restart = std::max(1, options.restart);

  std::vector<Complex> pb(n), tmp(n), r(n);
  precond(rhs, pb);
  const double pb_norm = nrm2(pb);
  KrylovResult result;
  if (pb_norm == 0.0) {
    std::fill(x.begin(), x.end(), Complex{0.0, 0.0});
    result.converged = true;
    return result;
  }

  // Hessenberg column storage for one restart cycle; the subdiagonal entry
  // of each column is annihilated on the fly by complex Givens rotations
  // (cs complex, sn real; the subdiagonal is real by construction).
  std::vector<std::vector<Complex>> V;
  std::vector<std::vector<Complex>> H;
  std::vector<Complex> cs(static_cast<std::size_t>(restart));
  std::vector<double> sn(static_cast<std::size_t>(restart));
  std::vector<Complex> g(static_cast<std::size_t>(restart) + 1);

  while (result.iterations < options.max_iterations) {
    op(x, tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = rhs[i] - tmp[i];
    precond(tmp, r);
    const double beta = nrm2(r);
    result.relative_residual = beta / pb_norm;
    if (result.relative_residual <= options.tol) {
      result.converged = true;
      return result;
    }

    V.assign(1, r);
    for (Complex& c : V[0]) c /= beta;
    H.clear();
    std::fill(g.begin(), g.end(), Complex{0.0, 0.0});
    g[0] = beta;

    int j = 0;
    bool inner_done = false;
    for (; j < restart && result.iterations < options.max_iterations && !inner_done; ++j) {
      ++result.iterations;
      op(V[static_cast<std::size_t>(j)], tmp);
      std::vector<Complex> w(n);
      precond(tmp, w);

      H.emplace_back(static_cast<std::size_t>(j) + 2);
      auto& col = H.back();
      for (int i = 0; i <= j; ++i) {  // modified Gram-Schmidt
        Complex hij = dot(V[static_cast<std::size_t>(i)], w);
        col[static_cast<std::size_t>(i)] = hij;
        axpy(-hij, V[static_cast<std::size_t>(i)], w);
      }
      const double wn = nrm2(w);
      col[static_cast<std::size_t>(j) + 1] = wn;
      if (wn > 0.0) {
        for (Complex& c : w) c /= wn;
      }
      V.push_back(std::move(w));

      for (int i = 0; i < j; ++i) {
        Complex top = std::conj(cs[static_cast<std::size_t>(i)]) * col[static_cast<std::size_t>(i)] +
                      sn[static_cast<std::size_t>(i)] * col[static_cast<std::size_t>(i) + 1];
        col[static_cast<std::size_t>(i) + 1] =
            -sn[static_cast<std::size_t>(i)] * col[static_cast<std::size_t>(i)] +
            cs[static_cast<std::size_t>(i)] * col[static_cast<std::size_t>(i) + 1];
        col[static_cast<std::size_t>(i)] = top;
      }
      const Complex a = col[static_cast<std::size_t>(j)];
      const double b = col[static_cast<std::size_t>(j) + 1].real();
      const double rho = std::sqrt(std::norm(a) + b * b);
      if (rho == 0.0) {
        cs[static_cast<std::size_t>(j)] = Complex{1.0, 0.0};
        sn[static_cast<std::size_t>(j)] = 0.0;
      } else {
        cs[static_cast<std::size_t>(j)] = a / rho;
        sn[static_cast<std::size_t>(j)] = b / rho;
      }
      col[static_cast<std::size_t>(j)] = rho;
      col[static_cast<std::size_t>(j) + 1] = Complex{0.0, 0.0};
      g[static_cast<std::size_t>(j) + 1] = -sn[static_cast<std::size_t>(j)] * g[static_cast<std::size_t>(j)];
      g[static_cast<std::size_t>(j)] = std::conj(cs[static_cast<std::size_t>(j)]) * g[static_cast<std::size_t>(j)];

      result.relative_residual = std::abs(g[static_cast<std::size_t>(j) + 1]) / pb_norm;
      if (result.relative_residual <= options.tol || rho == 0.0) inner_done = true;
    }

    std::vector<Complex> y(static_cast<std::size_t>(j));
    for (int i = j - 1; i >= 0; --i) {
      Complex s = g[static_cast<std::size_t>(i)];
      for (int l = i + 1; l < j; ++l) s -= H[static_cast<std::size_t>(l)][static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(l)];
      y[static_cast<std::size_t>(i)] = s / H[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
    }
    for (int i = 0; i < j; ++i) axpy(y[static_cast<std::size_t>(i)], V[static_cast<std::size_t>(i)], x);

    if (inner_done && result.relative_residual <= options.tol) {
      result.converged = true;
      return result;
    }
  }
  return result;
}

}  // namespace hihomog
