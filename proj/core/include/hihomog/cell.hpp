#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "hihomog/coefficients.hpp"
#include "hihomog/krylov.hpp"
#include "hihomog/multiindex.hpp"
#include "hihomog/spectral.hpp"

namespace hihomog {

// Constant tensor Ahat_{alpha beta} of the homogenized operator, stored as
// n x n blocks over the multiindex basis.
class EffectiveTensor {
 public:
  EffectiveTensor() = default;
  explicit EffectiveTensor(IndexBasis basis);

  const IndexBasis& basis() const { return basis_; }
  Eigen::MatrixXcd& block(int a, int b);
  const Eigen::MatrixXcd& block(int a, int b) const;

  // sigma(k) = sum_{ab} (2 pi k)^{alpha+beta} Ahat_{ab}; the Fourier symbol
  // of the homogenized operator (principal part).
  Eigen::MatrixXcd symbol(std::span<const int> k) const;

  EffectiveTensor adjointed() const;
  double max_abs() const;

 private:
  IndexBasis basis_;
  std::vector<Eigen::MatrixXcd> blocks_;
};

// Max entrywise distance, for commutation checks.
double distance(const EffectiveTensor& a, const EffectiveTensor& b);

struct CellSolveOptions {
  std::vector<int> cutoff;  // per axis; empty selects default_cell_cutoff
  KrylovOptions krylov;
};

struct CellSolveRecord {
  int component = 0;  // k
  MultiIndex gamma;
  KrylovResult krylov;
  double grad_norm = 0.0;  // |grad^m N^k_gamma|_Y, the computed a-priori bound
};

// Cell solutions for one coefficient array and (optionally) its adjoint:
// correctors N^k_gamma, effective tensor, flux remainders g^k_{alpha beta}.
struct CellData {
  IndexBasis basis;
  ModeBox box;       // corrector box
  ModeBox flux_box;  // corrector box widened by the coefficient band
  double tol = 0.0;

  std::vector<VectorField> correctors;  // slot g * n + k
  std::vector<CellSolveRecord> records;
  EffectiveTensor effective;
  std::vector<VectorField> flux;  // slot (k * mbar + a) * mbar + b

  bool has_adjoint = false;
  std::vector<VectorField> adjoint_correctors;
  std::vector<CellSolveRecord> adjoint_records;
  EffectiveTensor adjoint_effective;
  std::vector<VectorField> adjoint_flux;

  const VectorField& corrector(int k, int g) const;
  const VectorField& adjoint_corrector(int k, int g) const;
  const VectorField& flux_field(int k, int a, int b) const;
  const VectorField& adjoint_flux_field(int k, int a, int b) const;

  // The column {g^k_{alpha b}}_alpha as a FieldArray, for divergence and
  // potential construction.
  FieldArray flux_column(int k, int b) const;
  FieldArray adjoint_flux_column(int k, int b) const;
};

std::vector<int> default_cell_cutoff(const CoefficientArray& A);

// Mean-zero truncated-Galerkin solutions of the cell problems, one per
// (component, multiindex), matrix-free GMRES preconditioned by the
// constant-coefficient symbol. Fills correctors and records only.
CellData solve_correctors(const CoefficientArray& A, const CellSolveOptions& opt = {});

// Ahat_{alpha beta} e^k = < sum_gamma A_{alpha gamma}(e_{gamma beta} e^k
// + D^gamma N^k_beta) >, the cell average of the corrected flux.
EffectiveTensor effective_tensor(const CoefficientArray& A, const CellData& cell);

// g^k_{alpha beta} = flux - Ahat_{alpha beta} e^k; mean exactly zero.
std::vector<VectorField> flux_remainder(const CoefficientArray& A, const CellData& cell,
                                        const EffectiveTensor& Ahat);

// Full pipeline including the starred objects computed from adjoint(A).
CellData solve_all(const CoefficientArray& A, const CellSolveOptions& opt = {});

// max over k != 0 of |sum_alpha (2 pi i k)^alpha ghat_alpha(k)| relative to
// |p(k)| * |g|; the discrete form of the solenoidal relation.
double divergence_residual(const FieldArray& g);

struct SymbolCheck {
  bool passed = false;
  double worst_margin = 0.0;
  int samples = 0;
};

// Sampled positivity Re xi^H sigma(k) xi >= lambda0 S(k) |xi|^2 over random
// (k, xi); advisory, mirroring check_coercivity.
SymbolCheck check_symbol_positivity(const EffectiveTensor& Ahat, double lambda0,
                                    int samples, unsigned long seed);

}  // namespace hihomog
