#include "hihomog/potentials.hpp"

#include <cmath>
#include <stdexcept>

#include "hihomog/cell.hpp"

namespace hihomog {

namespace {

bool is_zero_mode(std::span<const int> k) {
  for (int kj : k) {
    if (kj != 0) return false;
  }
  return true;
}

}  // namespace

PotentialMatrix::PotentialMatrix(std::vector<MultiIndex> indices, int n, const ModeBox& box)
    : indices_(std::move(indices)), n_(n), box_(box) {
  entries_.assign(indices_.size() * indices_.size(), VectorField(n, box));
}

VectorField& PotentialMatrix::entry(int g, int a) {
  return entries_[static_cast<std::size_t>(g * slots() + a)];
}

const VectorField& PotentialMatrix::entry(int g, int a) const {
  return entries_[static_cast<std::size_t>(g * slots() + a)];
}

PotentialMatrix build_potential(const FieldArray& g, const PotentialBuildOptions& options) {
  const int slots = g.slots();
  const int n = g.components();
  const ModeBox& box = g.at(0).box();
  const double scale = norm_l2(g);

  for (int a = 0; a < slots; ++a) {
    for (int j = 0; j < n; ++j) {
      double mean = std::abs(g.at(a)[j].mean());
      if (mean > options.mean_tol * std::max(1.0, scale)) {
        throw std::invalid_argument("build_potential: <g_alpha> != 0, measured " +
                                    std::to_string(mean));
      }
    }
  }
  double div = divergence_residual(g);
  if (div > options.divergence_tol) {
    throw std::invalid_argument("build_potential: flux is not divergence free, residual " +
                                std::to_string(div));
  }

  PotentialMatrix G(g.indices(), n, box);
  std::vector<Complex> p(static_cast<std::size_t>(slots));
  for_each_mode(box, [&](std::span<const int> k, std::size_t i) {
    if (is_zero_mode(k)) return;
    double S = 0.0;
    for (int s = 0; s < slots; ++s) {
      p[static_cast<std::size_t>(s)] = derivative_symbol(k, g.index_at(s));
      S += std::norm(p[static_cast<std::size_t>(s)]);
    }
    if (S == 0.0) return;
    for (int gg = 0; gg < slots; ++gg) {
      for (int a = 0; a < slots; ++a) {
        Complex cg = std::conj(p[static_cast<std::size_t>(gg)]);
        Complex ca = std::conj(p[static_cast<std::size_t>(a)]);
        for (int j = 0; j < n; ++j) {
          G.entry(gg, a)[j][i] = (cg * g.at(a)[j][i] - ca * g.at(gg)[j][i]) / S;
        }
      }
    }
  });
  return G;
}

double representation_residual(const PotentialMatrix& G, const FieldArray& g) {
  const int slots = G.slots();
  const int n = G.components();
  const ModeBox& box = G.box();
  const double scale = norm_l2(g);
  if (scale == 0.0) {
    double total = 0.0;
    for (int gg = 0; gg < slots; ++gg) {
      for (int a = 0; a < slots; ++a) total += norm_l2(G.entry(gg, a));
    }
    return total;  // zero flux must give zero potential
  }
  double worst = 0.0;
  for_each_mode(box, [&](std::span<const int> k, std::size_t i) {
    double err2 = 0.0;
    for (int a = 0; a < slots; ++a) {
      for (int j = 0; j < n; ++j) {
        Complex acc = -g.at(a)[j].coefficient(k);
        for (int gg = 0; gg < slots; ++gg) {
          acc += derivative_symbol(k, G.indices()[static_cast<std::size_t>(gg)]) *
                 G.entry(gg, a)[j][i];
        }
        err2 += std::norm(acc);
      }
    }
    worst = std::max(worst, std::sqrt(err2) / scale);
  });
  return worst;
}

double skew_symmetry_defect(const PotentialMatrix& G) {
  double worst = 0.0;
  for (int gg = 0; gg < G.slots(); ++gg) {
    for (int a = 0; a < G.slots(); ++a) {
      for (int j = 0; j < G.components(); ++j) {
        const SpectralField& x = G.entry(gg, a)[j];
        const SpectralField& y = G.entry(a, gg)[j];
        for (std::size_t i = 0; i < x.num_modes(); ++i) {
          worst = std::max(worst, std::abs(x[i] + y[i]));
        }
      }
    }
  }
  return worst;
}

double potential_bound_ratio(const PotentialMatrix& G, const FieldArray& g) {
  const int m = G.indices().front().order();
  double hm2 = 0.0;
  for (int gg = 0; gg < G.slots(); ++gg) {
    for (int a = 0; a < G.slots(); ++a) {
      double h = norm_hm(G.entry(gg, a), m);
      hm2 += h * h;
    }
  }
  double gsum = 0.0;
  for (int a = 0; a < g.slots(); ++a) gsum += norm_l2(g.at(a));
  if (gsum == 0.0) return 0.0;
  return std::sqrt(hm2) / gsum;
}

Lemma22Report verify_lemma22(const PotentialMatrix& G, const FieldArray& g,
                             const SpectralField& Phi, int K,
                             const SpectralField& phi_test) {
  const int slots = G.slots();
  const int n = G.components();
  const int m = G.indices().front().order();
  const double eps = 1.0 / static_cast<double>(K);

  // working box: rescaled potential band plus the band of Phi
  std::vector<int> cut(G.box().cutoff());
  for (std::size_t j = 0; j < cut.size(); ++j) {
    cut[j] = K * cut[j] + std::max(Phi.box().cutoff()[j], phi_test.box().cutoff()[j]);
  }
  ModeBox big((std::vector<int>(cut)));

  Lemma22Report report;

  double worst_product = 0.0;
  for (int a = 0; a < slots; ++a) {
    for (int j = 0; j < n; ++j) {
      SpectralField lhs = multiply(rescale(g.at(a)[j], K), Phi, big);
      SpectralField rhs(big);
      double term_scale = norm_l2(lhs);
      for (int gg = 0; gg < slots; ++gg) {
        const MultiIndex& gamma = G.indices()[static_cast<std::size_t>(gg)];
        SpectralField lead =
            derivative(multiply(rescale(G.entry(gg, a)[j], K), Phi, big), gamma);
        lead *= Complex{std::pow(eps, m), 0.0};
        rhs += lead;
        term_scale = std::max(term_scale, norm_l2(lead));
        for (const MultiIndex& mu : lower_set(gamma)) {
          if (mu == gamma) continue;
          double c = static_cast<double>(leibniz_coefficient(gamma, mu));
          SpectralField t = multiply(rescale(derivative(G.entry(gg, a)[j], mu), K),
                                     derivative(Phi, gamma.minus(mu)), big);
          t *= Complex{-c * std::pow(eps, m - mu.order()), 0.0};
          rhs += t;
          term_scale = std::max(term_scale, norm_l2(t));
        }
      }
      if (term_scale > 0.0) {
        worst_product = std::max(worst_product, norm_l2(lhs - rhs) / term_scale);
      }
    }
  }
  report.product_identity_residual = worst_product;

  // M_a = sum_g D^g (G^eps_{g a} Phi); sum_a D^a M_a vanishes by skewness
  double worst_div = 0.0;
  for (int j = 0; j < n; ++j) {
    SpectralField acc(big);
    double scale = 0.0;
    for (int a = 0; a < slots; ++a) {
      SpectralField Ma(big);
      for (int gg = 0; gg < slots; ++gg) {
        Ma += derivative(multiply(rescale(G.entry(gg, a)[j], K), Phi, big),
                         G.indices()[static_cast<std::size_t>(gg)]);
      }
      SpectralField term = derivative(Ma, G.indices()[static_cast<std::size_t>(a)]);
      acc += term;
      scale += norm_l2(term);
    }
    if (scale > 0.0) worst_div = std::max(worst_div, norm_l2(acc) / scale);
  }
  report.divergence_free_residual = worst_div;

  // sum_{g,a} (D^g D^a phi, G^eps_{g a} Phi) = 0
  {
    Complex acc{0.0, 0.0};
    double scale = 0.0;
    for (int gg = 0; gg < slots; ++gg) {
      for (int a = 0; a < slots; ++a) {
        const MultiIndex& gamma = G.indices()[static_cast<std::size_t>(gg)];
        const MultiIndex& alpha = G.indices()[static_cast<std::size_t>(a)];
        SpectralField dphi = derivative(derivative(phi_test, gamma), alpha);
        for (int j = 0; j < n; ++j) {
          Complex term = inner(dphi, multiply(rescale(G.entry(gg, a)[j], K), Phi, big));
          acc += term;
          scale += std::abs(term);
        }
      }
    }
    report.quadratic_form_residual = scale > 0.0 ? std::abs(acc) / scale : 0.0;
  }
  return report;
}

}  // namespace hihomog
