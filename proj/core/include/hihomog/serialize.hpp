#pragma once

#include <string>
#include <vector>

#include "hihomog/cell.hpp"
#include "hihomog/coefficients.hpp"
#include "hihomog/spectral.hpp"

namespace hihomog {

// Field files: one JSON header line {schema, d, cutoff, components, dtype}
// followed by raw little-endian re/im double pairs, row-major over the
// shifted mode box, one component after another.
void save_field(const VectorField& f, const std::string& path);
VectorField load_field(const std::string& path);

void save_field(const SpectralField& f, const std::string& path);
SpectralField load_scalar_field(const std::string& path);

// Grid samples for plotting: columns x_1..x_d, re, im.
void export_csv(const SpectralField& f, const std::vector<int>& dims,
                const std::string& path);

// Coefficient manifest (JSON): {schema, d, m, n, lambda0, lambda1, family,
// entries: [{alpha, beta, j, k, modes: [{k, re, im}]}]}.
void save_coefficients(const CoefficientArray& A, const std::string& path);
CoefficientArray load_coefficients(const std::string& path);

// CellData directory: manifest.json (tensors, records, parameters) plus one
// field file per corrector and flux entry.
void save_cell_data(const CellData& cell, const std::string& dir);
CellData load_cell_data(const std::string& dir);

}  // namespace hihomog
