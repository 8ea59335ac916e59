#include "hihomog/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "hihomog/potentials.hpp"
#include "hihomog/serialize.hpp"

namespace hihomog {

namespace {

using json = nlohmann::ordered_json;

json slope_to_json(const SlopeFit& s) {
  json out;
  out["slope"] = s.slope;
  out["intercept"] = s.intercept;
  out["fit_residual"] = s.fit_residual;
  out["valid"] = s.valid;
  return out;
}

json verdicts_to_json(const std::vector<Verdict>& verdicts) {
  json out = json::array();
  for (const auto& v : verdicts) {
    json e;
    e["name"] = v.name;
    e["pass"] = v.pass;
    e["value"] = v.value;
    e["threshold"] = v.threshold;
    e["detail"] = v.detail;
    out.push_back(e);
  }
  return out;
}

bool all_pass(const std::vector<Verdict>& verdicts) {
  for (const auto& v : verdicts) {
    if (!v.pass) return false;
  }
  return true;
}

// n per-component gaussian coefficients with conjugate symmetry: a real
// band-limited field, unit variance per mode.
SpectralField random_real_field(int d, int band, std::mt19937_64& rng) {
  std::normal_distribution<double> dist;
  SpectralField f(ModeBox::uniform(d, band));
  std::vector<int> neg(static_cast<std::size_t>(d));
  for_each_mode(f.box(), [&](std::span<const int> k, std::size_t i) {
    for (std::size_t j = 0; j < neg.size(); ++j) neg[j] = -k[j];
    std::size_t ineg = f.box().index(neg);
    if (i < ineg) {
      Complex c{dist(rng), dist(rng)};
      f[i] = c;
      f[ineg] = std::conj(c);
    } else if (i == ineg) {
      f[i] = Complex{dist(rng), 0.0};
    }
  });
  return f;
}

SpectralField with_zero_mean(SpectralField f) {
  std::vector<int> zero(static_cast<std::size_t>(f.dim()), 0);
  f.set_coefficient(zero, Complex{0.0, 0.0});
  return f;
}

double grad_seminorm(const SpectralField& f, int order) {
  double s = 0.0;
  for_each_mode(f.box(), [&](std::span<const int> k, std::size_t i) {
    s += (sobolev_weight(k, order) - 1.0) * std::norm(f[i]);
  });
  return std::sqrt(s);
}

struct MaxTracker {
  double value = 0.0;
  void update(double v) { value = std::max(value, v); }
};

}  // namespace

int thread_cap() {
  if (const char* env = std::getenv("HIHOMOG_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

namespace {

// Runs tasks 0..count-1 on up to thread_cap() workers; results must be
// written into preallocated slots so the outcome is scheduling independent.
void parallel_for(int count, const std::function<void(int)>& task) {
  int workers = std::min(count, thread_cap());
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) task(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw std::invalid_argument("fit_slope needs >= 3 points");
  double sx = 0.0, sy = 0.0;
  for (const auto& [eps, err] : points) {
    if (!(err > 0.0)) throw std::invalid_argument("fit_slope: errors must be positive");
    if (!(eps > 0.0)) throw std::invalid_argument("fit_slope: eps must be positive");
    sx += std::log(eps);
    sy += std::log(err);
  }
  const double xbar = sx / static_cast<double>(points.size());
  const double ybar = sy / static_cast<double>(points.size());
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [eps, err] : points) {
    double dx = std::log(eps) - xbar;
    sxx += dx * dx;
    sxy += dx * (std::log(err) - ybar);
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  double res = 0.0;
  for (const auto& [eps, err] : points) {
    double e = std::log(err) - (fit.intercept + fit.slope * std::log(eps));
    res += e * e;
  }
  fit.fit_residual = std::sqrt(res / static_cast<double>(points.size()));
  fit.valid = true;
  return fit;
}

std::vector<ForcingMode> default_forcing(int d, int n) {
  std::vector<std::vector<int>> ks;
  if (d == 1) {
    ks = {{1}, {2}, {3}};
  } else {
    ks.assign(3, std::vector<int>(static_cast<std::size_t>(d), 0));
    ks[0][0] = 1;
    ks[0][1] = 1;
    ks[1][0] = 2;
    ks[1][1] = -1;
    ks[2][0] = 1;
    ks[2][1] = 2;
  }
  std::vector<ForcingMode> modes;
  double scale = 1.0 / std::sqrt(3.0 * n);
  for (auto& k : ks) {
    ForcingMode mode;
    mode.k = k;
    mode.amplitude.assign(static_cast<std::size_t>(n), Complex{scale, 0.0});
    modes.push_back(std::move(mode));
  }
  return modes;
}

VectorField build_forcing(const std::vector<ForcingMode>& modes, int d, int n) {
  std::vector<int> cut(static_cast<std::size_t>(d), 0);
  for (const auto& mode : modes) {
    if (static_cast<int>(mode.k.size()) != d) {
      throw std::invalid_argument("forcing mode dimension mismatch");
    }
    for (int j = 0; j < d; ++j) {
      cut[static_cast<std::size_t>(j)] =
          std::max(cut[static_cast<std::size_t>(j)], std::abs(mode.k[static_cast<std::size_t>(j)]));
    }
  }
  VectorField f(n, ModeBox(std::move(cut)));
  for (const auto& mode : modes) {
    for (int j = 0; j < n; ++j) {
      f[j].set_coefficient(mode.k,
                           f[j].coefficient(mode.k) + mode.amplitude[static_cast<std::size_t>(j)]);
    }
  }
  return f;
}

CoefficientArray load_coefficient_spec(const std::string& spec) {
  if (spec.rfind("builtin:", 0) == 0) {
    return builtin_coefficients_spec(spec.substr(8));
  }
  if (spec.rfind("file:", 0) == 0) {
    return load_coefficients(spec.substr(5));
  }
  throw std::invalid_argument("coefficient spec must start with builtin: or file:");
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json doc = json::parse(text);
  ExperimentConfig cfg;
  cfg.schema = doc.at("schema").get<std::string>();
  if (cfg.schema != "hihomog-config/1") {
    throw std::invalid_argument("unsupported config schema " + cfg.schema);
  }
  cfg.coefficients = doc.at("coefficients").get<std::string>();
  cfg.eps_denominators = doc.at("eps_denominators").get<std::vector<int>>();
  if (doc.contains("forcing")) {
    for (const auto& e : doc.at("forcing")) {
      ForcingMode mode;
      mode.k = e.at("k").get<std::vector<int>>();
      for (const auto& amp : e.at("amplitude")) {
        mode.amplitude.push_back(Complex{amp.at(0).get<double>(), amp.at(1).get<double>()});
      }
      cfg.forcing.push_back(std::move(mode));
    }
  }
  if (doc.contains("cell_cutoff")) cfg.cell_cutoff = doc.at("cell_cutoff").get<std::vector<int>>();
  if (doc.contains("cell_resolution")) {
    cfg.cell_resolution = doc.at("cell_resolution").get<std::vector<int>>();
  }
  if (doc.contains("tol")) cfg.tol = doc.at("tol").get<double>();
  if (doc.contains("max_iterations")) cfg.max_iterations = doc.at("max_iterations").get<int>();
  if (doc.contains("restart")) cfg.restart = doc.at("restart").get<int>();
  if (doc.contains("studies")) {
    const auto& s = doc.at("studies");
    cfg.study_zeroth = s.value("zeroth", true);
    cfg.study_first_order = s.value("first_order", true);
    cfg.study_second_order = s.value("second_order", false);
  }
  if (doc.contains("seed")) cfg.seed = doc.at("seed").get<unsigned long>();

  if (cfg.eps_denominators.size() < 3) {
    throw std::invalid_argument("config needs >= 3 eps values for slope fitting");
  }
  for (int K : cfg.eps_denominators) {
    if (K < 1) throw std::invalid_argument("eps denominators must be positive integers");
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string ExperimentConfig::to_json() const {
  json doc;
  doc["schema"] = schema;
  doc["coefficients"] = coefficients;
  doc["eps_denominators"] = eps_denominators;
  if (!forcing.empty()) {
    json fm = json::array();
    for (const auto& mode : forcing) {
      json e;
      e["k"] = mode.k;
      json amps = json::array();
      for (const Complex& a : mode.amplitude) amps.push_back({a.real(), a.imag()});
      e["amplitude"] = amps;
      fm.push_back(e);
    }
    doc["forcing"] = fm;
  }
  if (!cell_cutoff.empty()) doc["cell_cutoff"] = cell_cutoff;
  if (!cell_resolution.empty()) doc["cell_resolution"] = cell_resolution;
  doc["tol"] = tol;
  doc["max_iterations"] = max_iterations;
  doc["restart"] = restart;
  doc["studies"] = {{"zeroth", study_zeroth},
                    {"first_order", study_first_order},
                    {"second_order", study_second_order}};
  doc["seed"] = seed;
  return doc.dump(2);
}

ConvergenceReport run_convergence(const ExperimentConfig& cfg) {
  CoefficientArray A = load_coefficient_spec(cfg.coefficients);
  const IndexBasis& basis = A.basis();
  const int d = basis.dim();
  const int m = basis.m();
  const int n = basis.components();

  ConvergenceReport report;
  report.config_json = cfg.to_json();
  report.family = A.family();
  report.d = d;
  report.m = m;
  report.n = n;
  report.lambda0 = A.lambda0();
  report.lambda1 = A.lambda1();

  // coercivity gate
  {
    std::vector<int> band = A.band();
    int probe = 6;
    for (int b : band) probe = std::max(probe, b + 4);
    CoercivityEstimate est = check_coercivity(A, std::min(probe, 24));
    report.coercivity_estimate = est.value;
    if (!est.positive) {
      report.valid = false;
      report.verdicts.push_back({"coercivity_gate", false, est.value, 0.0,
                                 "coefficient family failed the coercivity gate"});
      return report;
    }
  }

  report.real_symmetric_scalar =
      n == 1 && A.is_real() && distance(EffectiveTensor(basis), EffectiveTensor(basis)) == 0.0;
  // transpose symmetry A_{ab} = A_{ba} entrywise
  if (report.real_symmetric_scalar) {
    for (int a = 0; a < basis.size() && report.real_symmetric_scalar; ++a) {
      for (int b = 0; b < basis.size() && report.real_symmetric_scalar; ++b) {
        bool ha = A.has_block(a, b), hb = A.has_block(b, a);
        if (ha != hb) {
          report.real_symmetric_scalar = false;
          break;
        }
        if (!ha) continue;
        SpectralField diff = A.block(a, b).at(0, 0) - A.block(b, a).at(0, 0);
        if (norm_l2(diff) > 1e-12 * (1.0 + norm_l2(A.block(a, b).at(0, 0)))) {
          report.real_symmetric_scalar = false;
        }
      }
    }
  }

  KrylovOptions krylov;
  krylov.tol = cfg.tol;
  krylov.max_iterations = cfg.max_iterations;
  krylov.restart = cfg.restart;

  CellSolveOptions cell_opt;
  cell_opt.cutoff = cfg.cell_cutoff;
  cell_opt.krylov = krylov;
  CellData cell = solve_all(A, cell_opt);

  BTensor B = b_coefficients(cell);
  MOperator M = assemble_M(B);
  report.b_scale = M.b_scale();
  report.m_cancellation = M.cancellation();
  report.second_order_gate_open = report.m_cancellation > 1e-6;

  HomogenizedOperator op(cell.effective);
  VectorField f = build_forcing(cfg.forcing.empty() ? default_forcing(d, n) : cfg.forcing, d, n);
  VectorField u = op.solve(f);
  VectorField k1f = apply_K1(op, M, f);

  report.error_floor = 10.0 * cfg.tol * norm_l2(f);

  std::vector<int> cell_res = cfg.cell_resolution;
  if (cell_res.empty()) {
    std::vector<int> band = A.band();
    cell_res.resize(band.size());
    for (std::size_t j = 0; j < band.size(); ++j) {
      int bf = f.box().cutoff()[j];
      // keep the rescaled corrector band inside the fine box
      cell_res[j] = band[j] > 0 ? std::max(4 * band[j] + bf + 2, cell.box.cutoff()[j] + bf) : 0;
    }
  }

  report.rows.assign(cfg.eps_denominators.size(), ConvergenceRow{});
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mutex;
  parallel_for(static_cast<int>(cfg.eps_denominators.size()), [&](int idx) {
    if (failed.load()) return;
    int K = cfg.eps_denominators[static_cast<std::size_t>(idx)];
    try {
      double eps = 1.0 / static_cast<double>(K);
      FineProblem p = FineProblem::make(A, K, f, cell_res);
      FineSolution fine = solve_fine(p, krylov);
      VectorField u_on_fine = resized(u, p.fine_box);

      ConvergenceRow row;
      row.K = K;
      row.eps = eps;
      row.fine_iterations = fine.krylov.iterations;
      row.fine_residual = fine.krylov.relative_residual;
      row.energy_ratio = fine.energy_ratio;
      row.err_l2_zeroth = norm_l2(fine.u - u_on_fine);
      {
        VectorField corrected = u_on_fine + Complex{eps, 0.0} * resized(k1f, p.fine_box);
        row.err_l2_second = norm_l2(fine.u - corrected);
      }
      VectorField u_tilde = first_order_approx(cell, u, K, p.fine_box);
      row.err_hm_twoscale = norm_hm(fine.u - u_tilde, m);
      CorrectorResult corr = corrector_operator(cell, op, f, K, p.fine_box);
      row.err_hm_corrector = norm_hm(fine.u - u_on_fine - corr.correction, m);
      row.corrector_hm_bound = corr.hm_over_f;
      row.corrector_l2_bound = corr.l2_over_f;
      ResidualReport res = residual_check(A, u_tilde, p.f, K);
      row.residual_hneg = res.residual_hneg;
      row.steklov_defect = res.steklov_defect_hneg;
      report.rows[static_cast<std::size_t>(idx)] = row;
    } catch (const std::exception& e) {
      std::scoped_lock lock(failure_mutex);
      failed = true;
      failure = e.what();
    }
  });
  if (failed.load()) {
    report.valid = false;
    report.verdicts.push_back({"solver", false, 0.0, 0.0, failure});
    return report;
  }
  report.valid = true;

  auto fit_of = [&](auto member) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : report.rows) {
      double v = row.*member;
      if (v > report.error_floor) pts.push_back({row.eps, v});
    }
    SlopeFit fit;
    if (pts.size() >= 3) fit = fit_slope(pts);
    return fit;
  };
  report.slope_zeroth = fit_of(&ConvergenceRow::err_l2_zeroth);
  report.slope_second = fit_of(&ConvergenceRow::err_l2_second);
  report.slope_hm_twoscale = fit_of(&ConvergenceRow::err_hm_twoscale);
  report.slope_hm_corrector = fit_of(&ConvergenceRow::err_hm_corrector);
  report.slope_residual = fit_of(&ConvergenceRow::residual_hneg);

  // verdicts; every threshold pinned here
  auto degenerate = [&](auto member) {
    for (const auto& row : report.rows) {
      if (row.*member > report.error_floor) return false;
    }
    return true;
  };
  if (cfg.study_zeroth) {
    // the eps^2 zeroth order of the symmetric scalar case needs 2m >= 4:
    // for m = 1 the corrector term itself sits at order eps
    bool eps2_case = report.real_symmetric_scalar && m >= 2;
    double threshold = eps2_case ? 1.75 : 0.75;
    if (degenerate(&ConvergenceRow::err_l2_zeroth)) {
      report.verdicts.push_back({"zeroth_l2_slope", true, 0.0, threshold,
                                 "all errors at solver floor; slope not applicable"});
    } else {
      report.verdicts.push_back({"zeroth_l2_slope", report.slope_zeroth.valid &&
                                     report.slope_zeroth.slope >= threshold,
                                 report.slope_zeroth.slope, threshold,
                                 eps2_case ? "real symmetric scalar family: eps^2 expected"
                                           : "uniform resolvent convergence order"});
    }
  }
  if (cfg.study_first_order) {
    for (auto [name, fit, member] :
         {std::tuple{"twoscale_hm_slope", &report.slope_hm_twoscale,
                     &ConvergenceRow::err_hm_twoscale},
          std::tuple{"corrector_hm_slope", &report.slope_hm_corrector,
                     &ConvergenceRow::err_hm_corrector}}) {
      if (degenerate(member)) {
        report.verdicts.push_back(
            {name, true, 0.0, 0.75, "all errors at solver floor; slope not applicable"});
      } else {
        report.verdicts.push_back({name, fit->valid && fit->slope >= 0.75, fit->slope, 0.75,
                                   "first-order H^m approximation order"});
      }
    }
    if (!degenerate(&ConvergenceRow::residual_hneg)) {
      report.verdicts.push_back({"residual_hneg_slope",
                                 report.slope_residual.valid &&
                                     report.slope_residual.slope >= 0.75,
                                 report.slope_residual.slope, 0.75,
                                 "discrepancy (L_eps+I)u~ - f in the dual norm"});
    }
  }
  if (cfg.study_second_order) {
    if (report.second_order_gate_open) {
      bool corrected = report.slope_second.valid && report.slope_second.slope >= 1.75;
      bool uncorrected = report.slope_zeroth.valid && report.slope_zeroth.slope <= 1.3;
      report.verdicts.push_back({"second_order_l2_slope", corrected,
                                 report.slope_second.slope, 1.75,
                                 "corrected resolvent error order with eps K1"});
      report.verdicts.push_back({"uncorrected_l2_stays_first_order", uncorrected,
                                 report.slope_zeroth.slope, 1.3,
                                 "zeroth error must stay first order when M != 0"});
    } else {
      bool pass = degenerate(&ConvergenceRow::err_l2_zeroth) ||
                  (report.slope_zeroth.valid && report.slope_zeroth.slope >= 1.75);
      report.verdicts.push_back({"second_order_gate_closed_eps2", pass,
                                 report.slope_zeroth.slope, 1.75,
                                 "M symbol below gate; zeroth order must already be eps^2"});
    }
  }
  // energy bound (10) for every fine solve
  {
    double worst = 0.0;
    for (const auto& row : report.rows) worst = std::max(worst, row.energy_ratio);
    report.verdicts.push_back({"energy_bound", worst <= 1.0 + 1e-6, worst, 1.0 + 1e-6,
                               "|u_eps|_{H^m} <= (1/min(1,lambda0)) |f|_{H^-m}"});
  }
  report.all_pass = all_pass(report.verdicts);
  return report;
}

std::string ConvergenceReport::to_json() const {
  json doc;
  doc["schema"] = schema;
  doc["family"] = family;
  doc["d"] = d;
  doc["m"] = m;
  doc["n"] = n;
  doc["lambda0"] = lambda0;
  doc["lambda1"] = lambda1;
  doc["real_symmetric_scalar"] = real_symmetric_scalar;
  doc["coercivity_estimate"] = coercivity_estimate;
  doc["b_scale"] = b_scale;
  doc["m_cancellation"] = m_cancellation;
  doc["second_order_gate_open"] = second_order_gate_open;
  doc["error_floor"] = error_floor;
  doc["valid"] = valid;
  json rows_json = json::array();
  for (const auto& r : rows) {
    json e;
    e["K"] = r.K;
    e["eps"] = r.eps;
    e["err_l2_zeroth"] = r.err_l2_zeroth;
    e["err_l2_second"] = r.err_l2_second;
    e["err_hm_twoscale"] = r.err_hm_twoscale;
    e["err_hm_corrector"] = r.err_hm_corrector;
    e["residual_hneg"] = r.residual_hneg;
    e["steklov_defect"] = r.steklov_defect;
    e["fine_iterations"] = r.fine_iterations;
    e["fine_residual"] = r.fine_residual;
    e["energy_ratio"] = r.energy_ratio;
    e["corrector_hm_bound"] = r.corrector_hm_bound;
    e["corrector_l2_bound"] = r.corrector_l2_bound;
    rows_json.push_back(e);
  }
  doc["rows"] = rows_json;
  doc["slopes"] = {{"zeroth_l2", slope_to_json(slope_zeroth)},
                   {"second_l2", slope_to_json(slope_second)},
                   {"twoscale_hm", slope_to_json(slope_hm_twoscale)},
                   {"corrector_hm", slope_to_json(slope_hm_corrector)},
                   {"residual_hneg", slope_to_json(slope_residual)}};
  doc["verdicts"] = verdicts_to_json(verdicts);
  doc["all_pass"] = all_pass;
  doc["config"] = json::parse(config_json);
  return doc.dump(2);
}

std::string ConvergenceReport::to_csv() const {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "K,eps,err_l2_zeroth,err_l2_second,err_hm_twoscale,err_hm_corrector,"
         "residual_hneg,steklov_defect,fine_iterations,fine_residual,energy_ratio\n";
  for (const auto& r : rows) {
    out << r.K << "," << r.eps << "," << r.err_l2_zeroth << "," << r.err_l2_second << ","
        << r.err_hm_twoscale << "," << r.err_hm_corrector << "," << r.residual_hneg << ","
        << r.steklov_defect << "," << r.fine_iterations << "," << r.fine_residual << ","
        << r.energy_ratio << "\n";
  }
  return out.str();
}

SmoothingConfig SmoothingConfig::from_json(const std::string& text) {
  json doc = json::parse(text);
  SmoothingConfig cfg;
  cfg.d = doc.value("d", 1);
  cfg.m = doc.value("m", 2);
  cfg.fields = doc.value("fields", 50);
  cfg.field_band = doc.value("field_band", 6);
  cfg.profile_band = doc.value("profile_band", 3);
  if (doc.contains("eps_denominators")) {
    cfg.eps_denominators = doc.at("eps_denominators").get<std::vector<int>>();
  }
  cfg.seed = doc.value("seed", 42UL);
  return cfg;
}

std::string SmoothingConfig::to_json() const {
  json doc;
  doc["d"] = d;
  doc["m"] = m;
  doc["fields"] = fields;
  doc["field_band"] = field_band;
  doc["profile_band"] = profile_band;
  doc["eps_denominators"] = eps_denominators;
  doc["seed"] = seed;
  return doc.dump(2);
}

SmoothingReport run_smoothing_suite(const SmoothingConfig& cfg) {
  SmoothingReport report;
  report.d = cfg.d;
  report.m = cfg.m;
  report.fields = cfg.fields;
  report.seed = cfg.seed;

  std::mt19937_64 rng(cfg.seed);
  const int d = cfg.d;
  const std::size_t ne = cfg.eps_denominators.size();

  MaxTracker contraction, first_order, weighted, second_ratio, dual_ratio, commutation;
  std::vector<double> defect(ne, 0.0), dual_defect(ne, 0.0), mean_zero_form(ne, 0.0),
      orth_pair(ne, 0.0), pair_defect(ne, 0.0);
  std::vector<std::vector<double>> second_ratios(static_cast<std::size_t>(cfg.fields),
                                                 std::vector<double>(ne, 0.0));

  for (int t = 0; t < cfg.fields; ++t) {
    SpectralField phi = random_real_field(d, cfg.field_band, rng);
    SpectralField psi = random_real_field(d, cfg.field_band, rng);
    SpectralField b = with_zero_mean(random_real_field(d, cfg.profile_band, rng));
    SpectralField pa = random_real_field(d, cfg.profile_band, rng);
    SpectralField pb_raw = random_real_field(d, cfg.profile_band, rng);
    // orthogonalize for the (a,b)_Y = 0 pair
    Complex proj = inner(pa, pb_raw) / inner(pa, pa);
    SpectralField pb_orth = pb_raw - proj * pa;

    const double phi_l2 = norm_l2(phi);
    const double phi_h1 = grad_seminorm(phi, 1);
    const double phi_h2 = grad_seminorm(phi, 2);
    const double psi_h1 = grad_seminorm(psi, 1);

    // multiplier commutation at one multiindex
    {
      MultiIndex alpha = MultiIndex::unit(d, 0).plus(MultiIndex::unit(d, d - 1));
      SpectralField lhs = steklov(derivative(phi, alpha), 0.25);
      SpectralField rhs = derivative(steklov(phi, 0.25), alpha);
      commutation.update(norm_l2(lhs - rhs) / std::max(1e-300, norm_l2(rhs)));
    }

    for (std::size_t ei = 0; ei < ne; ++ei) {
      int K = cfg.eps_denominators[ei];
      double eps = 1.0 / static_cast<double>(K);
      SpectralField sphi = steklov(phi, eps);
      SpectralField diff = sphi - phi;
      double dn = norm_l2(diff);

      contraction.update(norm_l2(sphi) / phi_l2);
      first_order.update(dn / (eps * phi_h1));
      double r2 = dn / (eps * eps * phi_h2);
      second_ratio.update(r2);
      second_ratios[static_cast<std::size_t>(t)][ei] = r2;
      dual_ratio.update(norm_h_negative(diff, cfg.m) / (eps * eps * phi_l2));
      defect[ei] = std::max(defect[ei], dn);
      dual_defect[ei] = std::max(dual_defect[ei], norm_h_negative(diff, cfg.m));

      SpectralField beps_sphi = multiply(rescale(b, K), sphi);
      weighted.update(norm_l2(beps_sphi) / (norm_l2(b) * phi_l2));
      double q4 = std::abs(inner(beps_sphi, psi)) / (norm_l2(b) * phi_h1 * psi_h1);
      mean_zero_form[ei] = std::max(mean_zero_form[ei], q4);

      SpectralField a_eps = multiply(rescale(pa, K), sphi);
      SpectralField b_eps = multiply(rescale(pb_orth, K), steklov(psi, eps));
      double q9 = std::abs(inner(a_eps, b_eps)) /
                  (norm_l2(pa) * norm_l2(pb_orth) * phi_h1 * psi_h1);
      orth_pair[ei] = std::max(orth_pair[ei], q9);

      SpectralField b_eps_raw = multiply(rescale(pb_raw, K), steklov(psi, eps));
      Complex exact = inner(pa, pb_raw) * inner(phi, psi);
      double q10 = std::abs(inner(a_eps, b_eps_raw) - exact) /
                   (norm_l2(pa) * norm_l2(pb_raw) * phi_l2 * psi_h1);
      pair_defect[ei] = std::max(pair_defect[ei], q10);
    }
  }

  report.worst_contraction = contraction.value;
  report.worst_first_order = first_order.value;
  report.worst_weighted = weighted.value;
  report.worst_second_ratio = second_ratio.value;
  report.worst_dual_ratio = dual_ratio.value;
  report.commutation_defect = commutation.value;

  // ratio growth under eps halving, worst over fields and adjacent pairs
  double growth = 0.0;
  for (const auto& ratios : second_ratios) {
    for (std::size_t ei = 0; ei + 1 < ne; ++ei) {
      if (2 * cfg.eps_denominators[ei] == cfg.eps_denominators[ei + 1] && ratios[ei] > 0.0) {
        growth = std::max(growth, ratios[ei + 1] / ratios[ei]);
      }
    }
  }
  report.second_ratio_growth = growth;

  auto fit_points = [&](const std::vector<double>& values) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t ei = 0; ei < ne; ++ei) {
      if (values[ei] > 0.0) {
        pts.push_back({1.0 / static_cast<double>(cfg.eps_denominators[ei]), values[ei]});
      }
    }
    SlopeFit fit;
    if (pts.size() >= 3) fit = fit_slope(pts);
    return fit;
  };
  report.slope_defect = fit_points(defect);
  report.slope_dual_defect = fit_points(dual_defect);
  report.slope_mean_zero_form = fit_points(mean_zero_form);
  report.slope_orthogonal_pair = fit_points(orth_pair);
  report.slope_pair_defect = fit_points(pair_defect);

  const double sqrt_d_over_2 = std::sqrt(static_cast<double>(d)) / 2.0;
  report.verdicts.push_back({"contraction", report.worst_contraction <= 1.0 + 1e-13,
                             report.worst_contraction, 1.0, "|S phi| <= |phi|"});
  report.verdicts.push_back({"first_order_constant",
                             report.worst_first_order <= sqrt_d_over_2 + 1e-13,
                             report.worst_first_order, sqrt_d_over_2,
                             "|S phi - phi| <= (sqrt(d)/2) eps |grad phi|"});
  report.verdicts.push_back({"weighted_contraction", report.worst_weighted <= 1.0 + 1e-12,
                             report.worst_weighted, 1.0,
                             "|b^eps S phi| <= <|b|^2>^{1/2} |phi|"});
  report.verdicts.push_back({"second_ratio_growth", report.second_ratio_growth <= 2.1,
                             report.second_ratio_growth, 2.1,
                             "eps^2 ratio stays bounded under halving"});
  report.verdicts.push_back({"defect_slope",
                             report.slope_defect.valid && report.slope_defect.slope >= 1.75,
                             report.slope_defect.slope, 1.75, "|S phi - phi| order"});
  report.verdicts.push_back({"dual_defect_slope",
                             report.slope_dual_defect.valid &&
                                 report.slope_dual_defect.slope >= 1.75,
                             report.slope_dual_defect.slope, 1.75,
                             "|S phi - phi|_{H^-m} order, m >= 2"});
  report.verdicts.push_back({"mean_zero_form_slope",
                             report.slope_mean_zero_form.valid &&
                                 report.slope_mean_zero_form.slope >= 1.75,
                             report.slope_mean_zero_form.slope, 1.75,
                             "(b^eps S phi, psi) order for <b> = 0, phi in H^1"});
  report.verdicts.push_back({"orthogonal_pair_slope",
                             report.slope_orthogonal_pair.valid &&
                                 report.slope_orthogonal_pair.slope >= 1.75,
                             report.slope_orthogonal_pair.slope, 1.75,
                             "(a^eps S phi, b^eps S psi) order for (a,b)_Y = 0"});
  report.verdicts.push_back({"pair_defect_slope",
                             report.slope_pair_defect.valid &&
                                 report.slope_pair_defect.slope >= 0.75,
                             report.slope_pair_defect.slope, 0.75,
                             "pair defect against (a,b)_Y (phi,psi)"});
  report.verdicts.push_back({"multiplier_commutation", report.commutation_defect <= 1e-13,
                             report.commutation_defect, 1e-13,
                             "S^eps D^alpha = D^alpha S^eps"});
  report.all_pass = all_pass(report.verdicts);
  return report;
}

std::string SmoothingReport::to_json() const {
  json doc;
  doc["schema"] = schema;
  doc["d"] = d;
  doc["m"] = m;
  doc["fields"] = fields;
  doc["seed"] = seed;
  doc["worst_contraction"] = worst_contraction;
  doc["worst_first_order"] = worst_first_order;
  doc["worst_weighted"] = worst_weighted;
  doc["worst_second_ratio"] = worst_second_ratio;
  doc["second_ratio_growth"] = second_ratio_growth;
  doc["worst_dual_ratio"] = worst_dual_ratio;
  doc["slopes"] = {{"defect", slope_to_json(slope_defect)},
                   {"dual_defect", slope_to_json(slope_dual_defect)},
                   {"mean_zero_form", slope_to_json(slope_mean_zero_form)},
                   {"orthogonal_pair", slope_to_json(slope_orthogonal_pair)},
                   {"pair_defect", slope_to_json(slope_pair_defect)}};
  doc["commutation_defect"] = commutation_defect;
  doc["verdicts"] = verdicts_to_json(verdicts);
  doc["all_pass"] = all_pass;
  return doc.dump(2);
}

StructureConfig StructureConfig::from_json(const std::string& text) {
  json doc = json::parse(text);
  StructureConfig cfg;
  cfg.coefficients = doc.at("coefficients").get<std::string>();
  if (doc.contains("cell_cutoff")) cfg.cell_cutoff = doc.at("cell_cutoff").get<std::vector<int>>();
  cfg.tol = doc.value("tol", 1e-12);
  cfg.K = doc.value("K", 8);
  cfg.seed = doc.value("seed", 42UL);
  return cfg;
}

std::string StructureConfig::to_json() const {
  json doc;
  doc["coefficients"] = coefficients;
  if (!cell_cutoff.empty()) doc["cell_cutoff"] = cell_cutoff;
  doc["tol"] = tol;
  doc["K"] = K;
  doc["seed"] = seed;
  return doc.dump(2);
}

StructureReport run_structure_suite(const StructureConfig& cfg) {
  CoefficientArray A = load_coefficient_spec(cfg.coefficients);
  KrylovOptions krylov;
  krylov.tol = cfg.tol;
  CellSolveOptions opt;
  opt.cutoff = cfg.cell_cutoff;
  opt.krylov = krylov;
  CellData cell = solve_all(A, opt);
  return run_structure_suite(A, cell, cfg);
}

StructureReport run_structure_suite(const CoefficientArray& A, const CellData& cell,
                                    const StructureConfig& cfg) {
  const IndexBasis& basis = A.basis();
  const int d = basis.dim();
  const int n = basis.components();

  StructureReport report;
  report.family = A.family();
  report.d = d;
  report.m = basis.m();
  report.n = n;

  KrylovOptions krylov;
  krylov.tol = cfg.tol;
  CellSolveOptions opt;
  opt.cutoff = cell.box.cutoff();
  opt.krylov = krylov;

  MaxTracker corr_mean, flux_mean, flux_div, flux_norm;
  for (int g = 0; g < basis.size(); ++g) {
    for (int k = 0; k < n; ++k) {
      for (int j = 0; j < n; ++j) {
        corr_mean.update(std::abs(cell.corrector(k, g)[j].mean()));
        corr_mean.update(std::abs(cell.adjoint_corrector(k, g)[j].mean()));
      }
    }
  }
  // columns below this level are solver residue of an identically zero
  // flux (the d = 1 closed forms); their relative divergence is meaningless
  const double flux_floor = 100.0 * cfg.tol * (1.0 + A.lambda1());
  for (int k = 0; k < n; ++k) {
    for (int b = 0; b < basis.size(); ++b) {
      FieldArray col = cell.flux_column(k, b);
      FieldArray col_star = cell.adjoint_flux_column(k, b);
      for (int a = 0; a < basis.size(); ++a) {
        for (int j = 0; j < n; ++j) {
          flux_mean.update(std::abs(col.at(a)[j].mean()));
          flux_mean.update(std::abs(col_star.at(a)[j].mean()));
        }
      }
      if (norm_l2(col) > flux_floor) flux_div.update(divergence_residual(col));
      if (norm_l2(col_star) > flux_floor) flux_div.update(divergence_residual(col_star));
      flux_norm.update(norm_l2(col));
    }
  }
  report.corrector_mean = corr_mean.value;
  report.flux_mean = flux_mean.value;
  report.flux_divergence = flux_div.value;
  report.flux_norm = flux_norm.value;

  // energy identity Re(grad N, A grad N) >= lambda0 |grad N|^2
  {
    double worst = 1e300;
    bool any = false;
    for (int g = 0; g < basis.size(); ++g) {
      for (int k = 0; k < n; ++k) {
        const VectorField& N = cell.corrector(k, g);
        FieldArray grad = gradient_array(N, basis.m());
        double gn = norm_l2(grad);
        if (gn < 1e-14) continue;
        any = true;
        FieldArray ag = generalized_gradient(A, 1, N);
        double energy = inner(grad, ag).real();
        worst = std::min(worst, (energy - A.lambda0() * gn * gn) / (gn * gn));
      }
    }
    report.energy_margin = any ? worst : 0.0;
  }

  // potentials on every nonzero flux column; record worst defects
  MaxTracker skew, repres, ratio, ratio_growth;
  double lemma_product = 0.0, lemma_div = 0.0, lemma_quad = 0.0;
  {
    std::mt19937_64 rng(cfg.seed);
    SpectralField Phi;
    {
      std::vector<int> kk(static_cast<std::size_t>(d), 1);
      Phi = SpectralField::mode(kk, Complex{1.0, 0.0});
    }
    SpectralField phi_test = random_real_field(d, 2, rng);

    // doubled-cutoff cell data for the (c13) ratio growth record
    CellSolveOptions opt2 = opt;
    opt2.cutoff = cell.box.cutoff();
    for (int& c : opt2.cutoff) c *= 2;
    CellData cell2 = solve_all(A, opt2);

    double floor = 100.0 * cfg.tol * (1.0 + A.lambda1());
    for (int k = 0; k < n; ++k) {
      for (int b = 0; b < basis.size(); ++b) {
        FieldArray col = cell.flux_column(k, b);
        if (norm_l2(col) <= floor) continue;
        PotentialMatrix G = build_potential(col);
        skew.update(skew_symmetry_defect(G));
        repres.update(representation_residual(G, col));
        double r1 = potential_bound_ratio(G, col);
        ratio.update(r1);
        FieldArray col2 = cell2.flux_column(k, b);
        PotentialMatrix G2 = build_potential(col2);
        double r2 = potential_bound_ratio(G2, col2);
        if (r1 > 0.0) ratio_growth.update(r2 / r1);

        Lemma22Report lem = verify_lemma22(G, col, Phi, cfg.K, phi_test);
        lemma_product = std::max(lemma_product, lem.product_identity_residual);
        lemma_div = std::max(lemma_div, lem.divergence_free_residual);
        lemma_quad = std::max(lemma_quad, lem.quadratic_form_residual);
      }
    }
  }
  report.skew_defect = skew.value;
  report.representation_defect = repres.value;
  report.bound_ratio = ratio.value;
  report.bound_ratio_growth = ratio_growth.value;
  report.lemma22_product = lemma_product;
  report.lemma22_divergence = lemma_div;
  report.lemma22_quadratic = lemma_quad;

  report.commutation_defect = distance(cell.adjoint_effective, cell.effective.adjointed());

  SymbolCheck sym = check_symbol_positivity(cell.effective, A.lambda0(), 100, cfg.seed);
  report.symbol_margin = sym.worst_margin;

  report.real_symmetric_scalar = n == 1 && A.is_real();
  if (report.real_symmetric_scalar) {
    for (int a = 0; a < basis.size() && report.real_symmetric_scalar; ++a) {
      for (int b = 0; b < basis.size() && report.real_symmetric_scalar; ++b) {
        bool ha = A.has_block(a, b), hb = A.has_block(b, a);
        if (ha != hb) report.real_symmetric_scalar = false;
        if (!ha || !report.real_symmetric_scalar) continue;
        SpectralField diff = A.block(a, b).at(0, 0) - A.block(b, a).at(0, 0);
        if (norm_l2(diff) > 1e-12 * (1.0 + norm_l2(A.block(a, b).at(0, 0)))) {
          report.real_symmetric_scalar = false;
        }
      }
    }
  }
  {
    BTensor B = b_coefficients(cell);
    MOperator M = assemble_M(B);
    report.m_cancellation = M.cancellation();
  }
  if (report.real_symmetric_scalar) {
    double gap = 0.0;
    for (int g = 0; g < basis.size(); ++g) {
      for (int k = 0; k < n; ++k) {
        gap = std::max(gap, norm_l2(cell.adjoint_corrector(k, g) - cell.corrector(k, g)));
      }
    }
    report.adjoint_corrector_gap = gap;
  }

  report.verdicts.push_back({"corrector_mean_zero", report.corrector_mean == 0.0,
                             report.corrector_mean, 0.0, "zero mode excluded structurally"});
  report.verdicts.push_back({"flux_mean_zero", report.flux_mean == 0.0, report.flux_mean,
                             0.0, "subtracted exactly in the assembly"});
  report.verdicts.push_back({"flux_divergence", report.flux_divergence <= 1e-9,
                             report.flux_divergence, 1e-9,
                             "per-frequency solenoidal residual"});
  report.verdicts.push_back({"energy_identity", report.energy_margin >= -1e-10,
                             report.energy_margin, -1e-10,
                             "Re(grad N, A grad N) >= lambda0 |grad N|^2"});
  report.verdicts.push_back({"skew_symmetry", report.skew_defect == 0.0, report.skew_defect,
                             0.0, "exact by construction"});
  report.verdicts.push_back({"representation", report.representation_defect <= 1e-9,
                             report.representation_defect, 1e-9,
                             "sum D^gamma G = g per frequency"});
  report.verdicts.push_back({"bound_ratio_growth",
                             report.bound_ratio == 0.0 || report.bound_ratio_growth <= 1.25,
                             report.bound_ratio_growth, 1.25,
                             "potential bound stable under cutoff doubling"});
  report.verdicts.push_back({"lemma22_product", report.lemma22_product <= 1e-10,
                             report.lemma22_product, 1e-10, "rescaled product identity"});
  report.verdicts.push_back({"lemma22_divergence", report.lemma22_divergence <= 1e-10,
                             report.lemma22_divergence, 1e-10,
                             "distributional divergence of M"});
  report.verdicts.push_back({"lemma22_quadratic", report.lemma22_quadratic <= 1e-10,
                             report.lemma22_quadratic, 1e-10, "skew pairing annihilation"});
  report.verdicts.push_back({"adjoint_commutation", report.commutation_defect <= 1e-8,
                             report.commutation_defect, 1e-8,
                             "hom(A*) = hom(A)* within solver tolerance"});
  report.verdicts.push_back({"symbol_positivity", report.symbol_margin >= -1e-10,
                             report.symbol_margin, -1e-10,
                             "sampled Garding inheritance of the effective symbol"});
  if (report.real_symmetric_scalar) {
    report.verdicts.push_back({"self_adjoint_correctors",
                               report.adjoint_corrector_gap <= 10.0 * cfg.tol,
                               report.adjoint_corrector_gap, 10.0 * cfg.tol,
                               "N* = N for real symmetric scalar"});
    report.verdicts.push_back({"m_symbol_cancellation", report.m_cancellation <= 1e-8,
                               report.m_cancellation, 1e-8,
                               "beta-gamma symmetrized sum entering M vanishes"});
  }
  report.all_pass = all_pass(report.verdicts);
  return report;
}

std::string StructureReport::to_json() const {
  json doc;
  doc["schema"] = schema;
  doc["family"] = family;
  doc["d"] = d;
  doc["m"] = m;
  doc["n"] = n;
  doc["corrector_mean"] = corrector_mean;
  doc["flux_mean"] = flux_mean;
  doc["flux_divergence"] = flux_divergence;
  doc["flux_norm"] = flux_norm;
  doc["energy_margin"] = energy_margin;
  doc["skew_defect"] = skew_defect;
  doc["representation_defect"] = representation_defect;
  doc["bound_ratio"] = bound_ratio;
  doc["bound_ratio_growth"] = bound_ratio_growth;
  doc["lemma22_product"] = lemma22_product;
  doc["lemma22_divergence"] = lemma22_divergence;
  doc["lemma22_quadratic"] = lemma22_quadratic;
  doc["commutation_defect"] = commutation_defect;
  doc["symbol_margin"] = symbol_margin;
  doc["real_symmetric_scalar"] = real_symmetric_scalar;
  doc["adjoint_corrector_gap"] = adjoint_corrector_gap;
  doc["m_cancellation"] = m_cancellation;
  doc["verdicts"] = verdicts_to_json(verdicts);
  doc["all_pass"] = all_pass;
  return doc.dump(2);
}

}  // namespace hihomog
