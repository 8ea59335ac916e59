// Command line front end: cell solves, convergence studies, the smoothing
// and structure property suites, and one-shot resolvent applications.
// Exit code is 0 iff every configured verdict passed.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "hihomog/harness.hpp"
#include "hihomog/potentials.hpp"
#include "hihomog/serialize.hpp"

namespace {

using namespace hihomog;

CoefficientArray coefficients_from(const std::string& coeffs_path,
                                   const std::string& builtin) {
  if (!coeffs_path.empty() && !builtin.empty()) {
    throw CLI::ValidationError("use either --coeffs or --builtin, not both");
  }
  if (!coeffs_path.empty()) return load_coefficients(coeffs_path);
  if (!builtin.empty()) return builtin_coefficients_spec(builtin);
  throw CLI::ValidationError("one of --coeffs or --builtin is required");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
}

int report_exit(bool pass) { return pass ? 0 : 1; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periodic homogenization toolkit for high order elliptic systems"};
  app.require_subcommand(1);

  // cell-solve
  std::string cs_coeffs, cs_builtin, cs_out;
  std::vector<int> cs_cutoff;
  double cs_tol = 1e-10;
  auto* cell_cmd = app.add_subcommand("cell-solve",
                                      "Solve the cell problems and write the cell data");
  cell_cmd->add_option("--coeffs", cs_coeffs, "coefficient manifest (JSON)");
  cell_cmd->add_option("--builtin", cs_builtin, "builtin family, name:key=value,...");
  cell_cmd->add_option("--cutoff", cs_cutoff, "per-axis corrector cutoff");
  cell_cmd->add_option("--tol", cs_tol, "Krylov relative residual");
  cell_cmd->add_option("--out", cs_out, "output directory")->required();

  // convergence
  std::string cv_config, cv_out;
  auto* conv_cmd = app.add_subcommand("convergence", "Run a convergence study");
  conv_cmd->add_option("--config", cv_config, "experiment config (JSON)")->required();
  conv_cmd->add_option("--out", cv_out, "report path (JSON; CSV written alongside)")
      ->required();

  // smoothing
  unsigned long sm_seed = 42;
  int sm_d = 1, sm_m = 2, sm_fields = 50;
  std::string sm_out;
  auto* smooth_cmd = app.add_subcommand("smoothing", "Run the smoothing property suite");
  smooth_cmd->add_option("--seed", sm_seed, "random seed");
  smooth_cmd->add_option("--d", sm_d, "dimension");
  smooth_cmd->add_option("--m", sm_m, "half order (for the dual norm)");
  smooth_cmd->add_option("--fields", sm_fields, "number of random fields");
  smooth_cmd->add_option("--out", sm_out, "report path (JSON)");

  // structure
  std::string st_cell, st_coeffs, st_builtin, st_out;
  std::vector<int> st_cutoff;
  int st_K = 8;
  auto* struct_cmd = app.add_subcommand("structure", "Run the structural identity suite");
  struct_cmd->add_option("--cell", st_cell, "cell data directory from cell-solve");
  struct_cmd->add_option("--coeffs", st_coeffs, "coefficient manifest (JSON)");
  struct_cmd->add_option("--builtin", st_builtin, "builtin family");
  struct_cmd->add_option("--cutoff", st_cutoff, "per-axis corrector cutoff");
  struct_cmd->add_option("--K", st_K, "big-torus scale for the rescaled identities");
  struct_cmd->add_option("--out", st_out, "report path (JSON)");

  // potential-check
  std::string pc_cell, pc_out;
  int pc_K = 8;
  auto* pot_cmd = app.add_subcommand("potential-check",
                                     "Verify the rescaled potential identities on cell data");
  pot_cmd->add_option("--cell", pc_cell, "cell data directory")->required();
  pot_cmd->add_option("--K", pc_K, "big-torus scale");
  pot_cmd->add_option("--out", pc_out, "report path (JSON)");

  // solve-fine
  std::string sf_coeffs, sf_builtin, sf_out;
  int sf_K = 8;
  double sf_tol = 1e-10;
  auto* fine_cmd = app.add_subcommand("solve-fine", "Solve L_eps u + u = f on the big torus");
  fine_cmd->add_option("--coeffs", sf_coeffs, "coefficient manifest (JSON)");
  fine_cmd->add_option("--builtin", sf_builtin, "builtin family");
  fine_cmd->add_option("--K", sf_K, "eps = 1/K");
  fine_cmd->add_option("--tol", sf_tol, "Krylov relative residual");
  fine_cmd->add_option("--out", sf_out, "solution field path")->required();

  // solve-hom
  std::string sh_coeffs, sh_builtin, sh_out;
  auto* hom_cmd = app.add_subcommand("solve-hom", "Solve the homogenized problem");
  hom_cmd->add_option("--coeffs", sh_coeffs, "coefficient manifest (JSON)");
  hom_cmd->add_option("--builtin", sh_builtin, "builtin family");
  hom_cmd->add_option("--out", sh_out, "solution field path")->required();

  // k1-apply
  std::string k1_cell, k1_out;
  auto* k1_cmd = app.add_subcommand("k1-apply", "Apply the second-order corrector K1 to f");
  k1_cmd->add_option("--cell", k1_cell, "cell data directory")->required();
  k1_cmd->add_option("--out", k1_out, "output field path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cell_cmd) {
      CoefficientArray A = coefficients_from(cs_coeffs, cs_builtin);
      CellSolveOptions opt;
      opt.cutoff = cs_cutoff;
      opt.krylov.tol = cs_tol;
      CellData cell = solve_all(A, opt);
      save_cell_data(cell, cs_out);
      save_coefficients(A, (std::filesystem::path(cs_out) / "coefficients.json").string());
      double worst = 0.0;
      for (const auto& r : cell.records) {
        worst = std::max(worst, r.krylov.relative_residual);
      }
      std::cout << "cell-solve: " << cell.records.size() << " problems, worst residual "
                << worst << ", data in " << cs_out << "\n";
      return 0;
    }
    if (*conv_cmd) {
      ExperimentConfig cfg = ExperimentConfig::from_json_file(cv_config);
      ConvergenceReport report = run_convergence(cfg);
      write_text(cv_out, report.to_json());
      std::filesystem::path csv = std::filesystem::path(cv_out).replace_extension(".csv");
      write_text(csv.string(), report.to_csv());
      for (const auto& v : report.verdicts) {
        std::cout << (v.pass ? "PASS " : "FAIL ") << v.name << " value " << v.value
                  << " threshold " << v.threshold << "\n";
      }
      std::cout << (report.valid ? "" : "REPORT INVALID: solver failure\n");
      return report_exit(report.valid && report.all_pass);
    }
    if (*smooth_cmd) {
      SmoothingConfig cfg;
      cfg.seed = sm_seed;
      cfg.d = sm_d;
      cfg.m = sm_m;
      cfg.fields = sm_fields;
      SmoothingReport report = run_smoothing_suite(cfg);
      if (!sm_out.empty()) write_text(sm_out, report.to_json());
      for (const auto& v : report.verdicts) {
        std::cout << (v.pass ? "PASS " : "FAIL ") << v.name << " value " << v.value
                  << " threshold " << v.threshold << "\n";
      }
      return report_exit(report.all_pass);
    }
    if (*struct_cmd) {
      StructureConfig cfg;
      cfg.K = st_K;
      cfg.cell_cutoff = st_cutoff;
      StructureReport report;
      if (!st_cell.empty()) {
        CoefficientArray A = load_coefficients(
            (std::filesystem::path(st_cell) / "coefficients.json").string());
        CellData cell = load_cell_data(st_cell);
        cfg.coefficients = "cell:" + st_cell;
        report = run_structure_suite(A, cell, cfg);
      } else {
        CoefficientArray probe = coefficients_from(st_coeffs, st_builtin);
        cfg.coefficients =
            st_coeffs.empty() ? "builtin:" + st_builtin : "file:" + st_coeffs;
        report = run_structure_suite(cfg);
      }
      if (!st_out.empty()) write_text(st_out, report.to_json());
      for (const auto& v : report.verdicts) {
        std::cout << (v.pass ? "PASS " : "FAIL ") << v.name << " value " << v.value
                  << " threshold " << v.threshold << "\n";
      }
      return report_exit(report.all_pass);
    }
    if (*pot_cmd) {
      CoefficientArray A = load_coefficients(
          (std::filesystem::path(pc_cell) / "coefficients.json").string());
      CellData cell = load_cell_data(pc_cell);
      StructureConfig cfg;
      cfg.K = pc_K;
      cfg.coefficients = "cell:" + pc_cell;
      StructureReport report = run_structure_suite(A, cell, cfg);
      if (!pc_out.empty()) write_text(pc_out, report.to_json());
      bool pass = true;
      for (const auto& v : report.verdicts) {
        if (v.name.rfind("lemma22", 0) == 0 || v.name == "skew_symmetry" ||
            v.name == "representation") {
          std::cout << (v.pass ? "PASS " : "FAIL ") << v.name << " value " << v.value
                    << " threshold " << v.threshold << "\n";
          pass = pass && v.pass;
        }
      }
      return report_exit(pass);
    }
    if (*fine_cmd) {
      CoefficientArray A = coefficients_from(sf_coeffs, sf_builtin);
      VectorField f = build_forcing(default_forcing(A.basis().dim(), A.basis().components()),
                                    A.basis().dim(), A.basis().components());
      FineProblem p = FineProblem::make(A, sf_K, f);
      KrylovOptions opt;
      opt.tol = sf_tol;
      FineSolution sol = solve_fine(p, opt);
      save_field(sol.u, sf_out);
      std::cout << "solve-fine: " << sol.krylov.iterations << " iterations, residual "
                << sol.krylov.relative_residual << ", energy ratio " << sol.energy_ratio
                << "\n";
      return 0;
    }
    if (*hom_cmd) {
      CoefficientArray A = coefficients_from(sh_coeffs, sh_builtin);
      CellData cell = solve_all(A, {});
      HomogenizedOperator op(cell.effective);
      VectorField f = build_forcing(default_forcing(A.basis().dim(), A.basis().components()),
                                    A.basis().dim(), A.basis().components());
      VectorField u = op.solve(f);
      save_field(u, sh_out);
      std::cout << "solve-hom: |u|_{H^2m}/|f| = "
                << elliptic_ratio(u, f, A.basis().m()) << "\n";
      return 0;
    }
    if (*k1_cmd) {
      CoefficientArray A = load_coefficients(
          (std::filesystem::path(k1_cell) / "coefficients.json").string());
      CellData cell = load_cell_data(k1_cell);
      HomogenizedOperator op(cell.effective);
      MOperator M = assemble_M(b_coefficients(cell));
      VectorField f = build_forcing(default_forcing(A.basis().dim(), A.basis().components()),
                                    A.basis().dim(), A.basis().components());
      VectorField k1f = apply_K1(op, M, f);
      save_field(k1f, k1_out);
      std::cout << "k1-apply: cancellation measure " << M.cancellation() << ", |K1 f| = "
                << norm_l2(k1f) << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
