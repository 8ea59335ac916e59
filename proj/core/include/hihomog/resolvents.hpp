#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "hihomog/cell.hpp"
#include "hihomog/coefficients.hpp"
#include "hihomog/krylov.hpp"
#include "hihomog/spectral.hpp"

namespace hihomog {

// The homogenized resolvent and its per-frequency block-diagonal symbol
// sigma(k) + I.
class HomogenizedOperator {
 public:
  HomogenizedOperator() = default;
  explicit HomogenizedOperator(EffectiveTensor Ahat);

  const EffectiveTensor& tensor() const { return Ahat_; }
  const IndexBasis& basis() const { return Ahat_.basis(); }
  Eigen::MatrixXcd symbol(std::span<const int> k) const { return Ahat_.symbol(k); }

  // u with (sigma(k) + I) uhat(k) = fhat(k); throws on a singular block.
  VectorField solve(const VectorField& f) const;
  VectorField apply(const VectorField& u) const;  // (Lhat + I) u

  HomogenizedOperator adjointed() const;

 private:
  EffectiveTensor Ahat_;
};

// |u|_{H^{2m}} / |f|_{L^2}, the recorded elliptic-regularity ratio.
double elliptic_ratio(const VectorField& u, const VectorField& f, int m);

// The resolvent problem L_eps u + u = f on the big torus with eps = 1/K.
struct FineProblem {
  const CoefficientArray* A = nullptr;
  int K = 1;
  VectorField f;
  ModeBox fine_box;

  // Per-axis resolution rule: N_cell_j = 4 band_j + f_band_j + 2 where the
  // coefficients vary, else the forcing band alone; fine cutoff K * N_cell_j.
  static FineProblem make(const CoefficientArray& A, int K, const VectorField& f);
  static FineProblem make(const CoefficientArray& A, int K, const VectorField& f,
                          std::span<const int> cell_resolution);
};

struct FineSolution {
  VectorField u;
  KrylovResult krylov;
  double hm_norm = 0.0;
  double f_hneg_norm = 0.0;
  double energy_ratio = 0.0;  // |u|_{H^m} * min(1, lambda0) / |f|_{H^{-m}}
};

// Galerkin solution on the fine box, matrix-free GMRES preconditioned by the
// mean-coefficient symbol (sigma_<A>(k) + I)^{-1}. Throws on non-convergence
// with the residual in the message.
FineSolution solve_fine(const FineProblem& p, const KrylovOptions& opt = {});

// (L_eps + I) u on the fine box; also serves the residual evaluation.
VectorField apply_fine(const CoefficientArray& A, int K, const VectorField& u);

// Two-scale first-order approximation
//   u~ = S^eps u + eps^m sum_{k,gamma} N^k_gamma(x/eps) S^eps D^gamma u_k
// on the fine box. Throws if the rescaled corrector band overflows the box.
VectorField first_order_approx(const CellData& cell, const VectorField& u, int K,
                               const ModeBox& fine_box);

struct CorrectorResult {
  VectorField correction;  // eps^m K_eps f
  double hm_over_f = 0.0;  // |eps^m K_eps f|_{H^m} / |f|
  double l2_over_f = 0.0;  // |K_eps f|_{L^2} / |f|
};

// The correcting operator K_eps f = sum N^k_gamma(x/eps) S^eps D^gamma u_k
// with u = (Lhat + I)^{-1} f, plus its boundedness records.
CorrectorResult corrector_operator(const CellData& cell, const HomogenizedOperator& op,
                                   const VectorField& f, int K, const ModeBox& fine_box);

struct ResidualReport {
  double residual_hneg = 0.0;        // |(L_eps + I) u~ - f|_{H^{-m}}
  double steklov_defect_hneg = 0.0;  // |S^eps f - f|_{H^{-m}}
};

ResidualReport residual_check(const CoefficientArray& A, const VectorField& u_tilde,
                              const VectorField& f, int K);

// Coefficients b^{jk}_{alpha beta gamma mu} with mu = alpha - e_axis,
// |mu| = m - 1; the data of the second-order correction.
class BTensor {
 public:
  BTensor() = default;
  explicit BTensor(IndexBasis basis);

  const IndexBasis& basis() const { return basis_; }
  bool valid(int a, int axis) const;  // alpha_axis > 0
  Eigen::MatrixXcd& entry(int a, int b, int g, int axis);
  const Eigen::MatrixXcd& entry(int a, int b, int g, int axis) const;
  double scale() const;  // max entry magnitude

  // Entries at or below this level are solver noise, not data; set from the
  // cell tolerance and the flux/corrector scales.
  double noise_floor() const { return noise_floor_; }
  void set_noise_floor(double floor) { noise_floor_ = floor; }

 private:
  std::size_t offset(int a, int b, int g, int axis) const;
  IndexBasis basis_;
  double noise_floor_ = 0.0;
  std::vector<Eigen::MatrixXcd> entries_;
};

// b^{jk}_{alpha beta gamma mu} = c_{alpha,mu} (D^mu N*^j_gamma, g^k_{alpha beta})_Y
//                              - c_{alpha,mu} (g*^j_{alpha gamma}, D^mu N^k_beta)_Y.
// Requires the starred cell data.
BTensor b_coefficients(const CellData& cell);

// The constant-coefficient operator M of order 2m+1 assembled from B,
// realized through its symbol tau(k).
class MOperator {
 public:
  MOperator() = default;
  explicit MOperator(BTensor b);

  const BTensor& coefficients() const { return b_; }
  // tau(k) = (-1)^m sum B_{alpha beta gamma mu} (2 pi i k)^{alpha+beta+gamma-mu}
  Eigen::MatrixXcd tau(std::span<const int> k) const;

  // Scale-free cancellation measure: max over |k_j| <= kmax of |tau(k)|
  // against the no-cancellation bound sum |B| |(2 pi k)^nu|. Zero when B = 0.
  double cancellation(int kmax = 4) const;
  double b_scale() const { return b_.scale(); }

 private:
  IndexBasis basis_;
  BTensor b_;
};

MOperator assemble_M(const BTensor& b);

// K_1 f = (Lhat + I)^{-1} M (Lhat + I)^{-1} f, per frequency.
VectorField apply_K1(const HomogenizedOperator& op, const MOperator& M,
                     const VectorField& f);

// Gamma_alpha = sum_beta A_{alpha beta}(x/eps) D^beta w (fine variant) or
// with the effective tensor (homogenized variant); diagnostics only.
FieldArray generalized_gradient(const CoefficientArray& A, int K, const VectorField& w);
FieldArray generalized_gradient(const EffectiveTensor& Ahat, const VectorField& w);

}  // namespace hihomog
