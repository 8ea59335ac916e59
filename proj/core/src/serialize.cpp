#include "hihomog/serialize.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#include <json.hpp>

namespace hihomog {

namespace {

using json = nlohmann::ordered_json;

void write_payload(std::ofstream& out, const SpectralField& f) {
  for (const Complex& c : f.coeffs()) {
    double re = c.real(), im = c.imag();
    out.write(reinterpret_cast<const char*>(&re), sizeof(double));
    out.write(reinterpret_cast<const char*>(&im), sizeof(double));
  }
}

void read_payload(std::ifstream& in, SpectralField& f) {
  for (Complex& c : f.coeffs()) {
    double re = 0.0, im = 0.0;
    in.read(reinterpret_cast<char*>(&re), sizeof(double));
    in.read(reinterpret_cast<char*>(&im), sizeof(double));
    c = Complex{re, im};
  }
  if (!in) throw std::runtime_error("field payload truncated");
}

std::string index_tag(const MultiIndex& a) {
  std::string s;
  for (int i = 0; i < a.dim(); ++i) {
    if (i) s += "-";
    s += std::to_string(a[i]);
  }
  return s;
}

json tensor_to_json(const EffectiveTensor& t) {
  json out = json::array();
  const IndexBasis& basis = t.basis();
  for (int a = 0; a < basis.size(); ++a) {
    for (int b = 0; b < basis.size(); ++b) {
      json entry;
      entry["alpha"] = basis.at(a).exponents();
      entry["beta"] = basis.at(b).exponents();
      json mat = json::array();
      for (int j = 0; j < basis.components(); ++j) {
        for (int k = 0; k < basis.components(); ++k) {
          mat.push_back({t.block(a, b)(j, k).real(), t.block(a, b)(j, k).imag()});
        }
      }
      entry["values"] = mat;
      out.push_back(entry);
    }
  }
  return out;
}

EffectiveTensor tensor_from_json(const json& j, const IndexBasis& basis) {
  EffectiveTensor t(basis);
  for (const auto& entry : j) {
    MultiIndex alpha(entry.at("alpha").get<std::vector<int>>());
    MultiIndex beta(entry.at("beta").get<std::vector<int>>());
    int a = basis.position(alpha);
    int b = basis.position(beta);
    if (a < 0 || b < 0) throw std::runtime_error("tensor entry outside basis");
    const auto& mat = entry.at("values");
    std::size_t idx = 0;
    for (int jj = 0; jj < basis.components(); ++jj) {
      for (int k = 0; k < basis.components(); ++k, ++idx) {
        t.block(a, b)(jj, k) = Complex{mat.at(idx).at(0).get<double>(),
                                       mat.at(idx).at(1).get<double>()};
      }
    }
  }
  return t;
}

json records_to_json(const std::vector<CellSolveRecord>& records) {
  json out = json::array();
  for (const auto& r : records) {
    json e;
    e["component"] = r.component;
    e["gamma"] = r.gamma.exponents();
    e["iterations"] = r.krylov.iterations;
    e["residual"] = r.krylov.relative_residual;
    e["converged"] = r.krylov.converged;
    e["grad_norm"] = r.grad_norm;
    out.push_back(e);
  }
  return out;
}

std::vector<CellSolveRecord> records_from_json(const json& j) {
  std::vector<CellSolveRecord> out;
  for (const auto& e : j) {
    CellSolveRecord r;
    r.component = e.at("component").get<int>();
    r.gamma = MultiIndex(e.at("gamma").get<std::vector<int>>());
    r.krylov.iterations = e.at("iterations").get<int>();
    r.krylov.relative_residual = e.at("residual").get<double>();
    r.krylov.converged = e.at("converged").get<bool>();
    r.grad_norm = e.at("grad_norm").get<double>();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

void save_field(const VectorField& f, const std::string& path) {
  json header;
  header["schema"] = "hihomog-field/1";
  header["d"] = f.box().dim();
  header["cutoff"] = f.box().cutoff();
  header["components"] = f.components();
  header["dtype"] = "complex128";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << header.dump() << "\n";
  for (int j = 0; j < f.components(); ++j) write_payload(out, f[j]);
}

VectorField load_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::getline(in, line);
  json header = json::parse(line);
  if (header.at("schema").get<std::string>() != "hihomog-field/1") {
    throw std::runtime_error("unknown field schema in " + path);
  }
  ModeBox box(header.at("cutoff").get<std::vector<int>>());
  int n = header.at("components").get<int>();
  VectorField f(n, box);
  for (int j = 0; j < n; ++j) read_payload(in, f[j]);
  return f;
}

void save_field(const SpectralField& f, const std::string& path) {
  save_field(VectorField(std::vector<SpectralField>{f}), path);
}

SpectralField load_scalar_field(const std::string& path) {
  VectorField f = load_field(path);
  if (f.components() != 1) throw std::runtime_error("expected a scalar field in " + path);
  return f[0];
}

void export_csv(const SpectralField& f, const std::vector<int>& dims,
                const std::string& path) {
  auto grid = sample_grid(f, dims);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << std::setprecision(17);
  for (int j = 0; j < f.dim(); ++j) out << "x" << (j + 1) << ",";
  out << "re,im\n";
  std::vector<int> idx(dims.size(), 0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = 0; j < dims.size(); ++j) {
      out << (static_cast<double>(idx[j]) / dims[j]) << ",";
    }
    out << grid[i].real() << "," << grid[i].imag() << "\n";
    for (int j = static_cast<int>(dims.size()) - 1; j >= 0; --j) {
      if (++idx[static_cast<std::size_t>(j)] < dims[static_cast<std::size_t>(j)]) break;
      idx[static_cast<std::size_t>(j)] = 0;
    }
  }
}

void save_coefficients(const CoefficientArray& A, const std::string& path) {
  const IndexBasis& basis = A.basis();
  json out;
  out["schema"] = "hihomog-coefficients/1";
  out["d"] = basis.dim();
  out["m"] = basis.m();
  out["n"] = basis.components();
  out["lambda0"] = A.lambda0();
  out["lambda1"] = A.lambda1();
  out["family"] = A.family();
  json entries = json::array();
  for (int a = 0; a < basis.size(); ++a) {
    for (int b = 0; b < basis.size(); ++b) {
      if (!A.has_block(a, b)) continue;
      for (int j = 0; j < basis.components(); ++j) {
        for (int k = 0; k < basis.components(); ++k) {
          const SpectralField& f = A.block(a, b).at(j, k);
          json modes = json::array();
          for_each_mode(f.box(), [&](std::span<const int> kk, std::size_t i) {
            if (f[i] == Complex{0.0, 0.0}) return;
            json m;
            m["k"] = std::vector<int>(kk.begin(), kk.end());
            m["re"] = f[i].real();
            m["im"] = f[i].imag();
            modes.push_back(m);
          });
          json e;
          e["alpha"] = basis.at(a).exponents();
          e["beta"] = basis.at(b).exponents();
          e["j"] = j;
          e["k"] = k;
          e["modes"] = modes;
          entries.push_back(e);
        }
      }
    }
  }
  out["entries"] = entries;
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << out.dump(2) << "\n";
}

CoefficientArray load_coefficients(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json doc = json::parse(in);
  if (doc.at("schema").get<std::string>() != "hihomog-coefficients/1") {
    throw std::runtime_error("unknown coefficient schema in " + path);
  }
  IndexBasis basis(doc.at("m").get<int>(), doc.at("d").get<int>(), doc.at("n").get<int>());
  CoefficientArray A(basis, doc.at("lambda0").get<double>(), doc.at("lambda1").get<double>());
  if (doc.contains("family")) A.set_family(doc.at("family").get<std::string>());

  // First pass: per-(alpha,beta) band; second: fill.
  std::vector<std::vector<int>> band(
      static_cast<std::size_t>(basis.size() * basis.size()),
      std::vector<int>(static_cast<std::size_t>(basis.dim()), -1));
  for (const auto& e : doc.at("entries")) {
    int a = basis.position(MultiIndex(e.at("alpha").get<std::vector<int>>()));
    int b = basis.position(MultiIndex(e.at("beta").get<std::vector<int>>()));
    if (a < 0 || b < 0) throw std::runtime_error("coefficient entry outside basis");
    auto& bb = band[static_cast<std::size_t>(a * basis.size() + b)];
    if (bb[0] < 0) bb.assign(static_cast<std::size_t>(basis.dim()), 0);
    for (const auto& mode : e.at("modes")) {
      auto kk = mode.at("k").get<std::vector<int>>();
      for (std::size_t j = 0; j < kk.size(); ++j) {
        bb[j] = std::max(bb[j], std::abs(kk[j]));
      }
    }
  }
  std::vector<std::optional<MatrixField>> blocks(
      static_cast<std::size_t>(basis.size() * basis.size()));
  for (const auto& e : doc.at("entries")) {
    int a = basis.position(MultiIndex(e.at("alpha").get<std::vector<int>>()));
    int b = basis.position(MultiIndex(e.at("beta").get<std::vector<int>>()));
    auto& blk = blocks[static_cast<std::size_t>(a * basis.size() + b)];
    if (!blk) {
      blk = MatrixField(basis.components(),
                        ModeBox(band[static_cast<std::size_t>(a * basis.size() + b)]));
    }
    SpectralField& f = blk->at(e.at("j").get<int>(), e.at("k").get<int>());
    for (const auto& mode : e.at("modes")) {
      auto kk = mode.at("k").get<std::vector<int>>();
      f.set_coefficient(kk, Complex{mode.at("re").get<double>(), mode.at("im").get<double>()});
    }
  }
  for (int a = 0; a < basis.size(); ++a) {
    for (int b = 0; b < basis.size(); ++b) {
      auto& blk = blocks[static_cast<std::size_t>(a * basis.size() + b)];
      if (blk) A.set_block(a, b, std::move(*blk));
    }
  }
  return A;
}

void save_cell_data(const CellData& cell, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "fields");
  const IndexBasis& basis = cell.basis;

  json manifest;
  manifest["schema"] = "hihomog-cell/1";
  manifest["d"] = basis.dim();
  manifest["m"] = basis.m();
  manifest["n"] = basis.components();
  manifest["cutoff"] = cell.box.cutoff();
  manifest["flux_cutoff"] = cell.flux_box.cutoff();
  manifest["tol"] = cell.tol;
  manifest["has_adjoint"] = cell.has_adjoint;
  manifest["effective"] = tensor_to_json(cell.effective);
  manifest["records"] = records_to_json(cell.records);
  if (cell.has_adjoint) {
    manifest["adjoint_effective"] = tensor_to_json(cell.adjoint_effective);
    manifest["adjoint_records"] = records_to_json(cell.adjoint_records);
  }
  std::ofstream os(fs::path(dir) / "manifest.json");
  if (!os) throw std::runtime_error("cannot write manifest in " + dir);
  os << manifest.dump(2) << "\n";

  auto field_path = [&](const std::string& stem) {
    return (fs::path(dir) / "fields" / (stem + ".hhf")).string();
  };
  for (int g = 0; g < basis.size(); ++g) {
    for (int k = 0; k < basis.components(); ++k) {
      save_field(cell.corrector(k, g), field_path("N_" + std::to_string(k) + "_" +
                                                  index_tag(basis.at(g))));
      if (cell.has_adjoint) {
        save_field(cell.adjoint_corrector(k, g),
                   field_path("Nstar_" + std::to_string(k) + "_" + index_tag(basis.at(g))));
      }
    }
  }
  if (!cell.flux.empty()) {
    for (int k = 0; k < basis.components(); ++k) {
      for (int a = 0; a < basis.size(); ++a) {
        for (int b = 0; b < basis.size(); ++b) {
          std::string tag = std::to_string(k) + "_" + index_tag(basis.at(a)) + "_" +
                            index_tag(basis.at(b));
          save_field(cell.flux_field(k, a, b), field_path("g_" + tag));
          if (cell.has_adjoint) {
            save_field(cell.adjoint_flux_field(k, a, b), field_path("gstar_" + tag));
          }
        }
      }
    }
  }
}

CellData load_cell_data(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream in(fs::path(dir) / "manifest.json");
  if (!in) throw std::runtime_error("cannot open manifest in " + dir);
  json manifest = json::parse(in);
  if (manifest.at("schema").get<std::string>() != "hihomog-cell/1") {
    throw std::runtime_error("unknown cell schema in " + dir);
  }

  CellData cell;
  cell.basis = IndexBasis(manifest.at("m").get<int>(), manifest.at("d").get<int>(),
                          manifest.at("n").get<int>());
  cell.box = ModeBox(manifest.at("cutoff").get<std::vector<int>>());
  cell.flux_box = ModeBox(manifest.at("flux_cutoff").get<std::vector<int>>());
  cell.tol = manifest.at("tol").get<double>();
  cell.has_adjoint = manifest.at("has_adjoint").get<bool>();
  cell.effective = tensor_from_json(manifest.at("effective"), cell.basis);
  cell.records = records_from_json(manifest.at("records"));
  if (cell.has_adjoint) {
    cell.adjoint_effective = tensor_from_json(manifest.at("adjoint_effective"), cell.basis);
    cell.adjoint_records = records_from_json(manifest.at("adjoint_records"));
  }

  const IndexBasis& basis = cell.basis;
  auto field_path = [&](const std::string& stem) {
    return (fs::path(dir) / "fields" / (stem + ".hhf")).string();
  };
  cell.correctors.assign(static_cast<std::size_t>(basis.size() * basis.components()),
                         VectorField(basis.components(), cell.box));
  if (cell.has_adjoint) cell.adjoint_correctors = cell.correctors;
  for (int g = 0; g < basis.size(); ++g) {
    for (int k = 0; k < basis.components(); ++k) {
      cell.correctors[static_cast<std::size_t>(g * basis.components() + k)] =
          load_field(field_path("N_" + std::to_string(k) + "_" + index_tag(basis.at(g))));
      if (cell.has_adjoint) {
        cell.adjoint_correctors[static_cast<std::size_t>(g * basis.components() + k)] =
            load_field(field_path("Nstar_" + std::to_string(k) + "_" + index_tag(basis.at(g))));
      }
    }
  }
  std::string probe = (fs::path(dir) / "fields" /
                       ("g_0_" + index_tag(basis.at(0)) + "_" + index_tag(basis.at(0)) + ".hhf"))
                          .string();
  if (fs::exists(probe)) {
    const int mbar = basis.size();
    cell.flux.assign(static_cast<std::size_t>(basis.components() * mbar * mbar),
                     VectorField(basis.components(), cell.flux_box));
    if (cell.has_adjoint) cell.adjoint_flux = cell.flux;
    for (int k = 0; k < basis.components(); ++k) {
      for (int a = 0; a < mbar; ++a) {
        for (int b = 0; b < mbar; ++b) {
          std::string tag = std::to_string(k) + "_" + index_tag(basis.at(a)) + "_" +
                            index_tag(basis.at(b));
          cell.flux[static_cast<std::size_t>((k * mbar + a) * mbar + b)] =
              load_field(field_path("g_" + tag));
          if (cell.has_adjoint) {
            cell.adjoint_flux[static_cast<std::size_t>((k * mbar + a) * mbar + b)] =
                load_field(field_path("gstar_" + tag));
          }
        }
      }
    }
  }
  return cell;
}

}  // namespace hihomog
