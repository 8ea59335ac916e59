#pragma once

#include <complex>
#include <functional>
#include <span>

namespace hihomog {

using Complex = std::complex<double>;

// Action y = Op(x) on contiguous complex vectors of equal length.
using LinearOp = std::function<void(std::span<const Complex>, std::span<Complex>)>;

struct KrylovOptions {
  double tol = 1e-10;       // relative preconditioned residual
  int max_iterations = 500; // total across restarts
  int restart = 40;
};

struct KrylovResult {
  bool converged = false;
  int iterations = 0;
  double relative_residual = 0.0;
};

// Left-preconditioned restarted GMRES for coercive non-Hermitian systems:
// solves P(A x) = P(b) to |P(b - A x)| <= tol * |P(b)|. x carries the
// initial guess. A zero right-hand side returns x = 0 immediately.
KrylovResult gmres(const LinearOp& op, const LinearOp& precond,
                   std::span<const Complex> rhs, std::span<Complex> x,
                   const KrylovOptions& options);

}  // namespace hihomog
