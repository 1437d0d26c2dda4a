// homog: command-line front end of the two-scale homogenization library.
//
// Exit codes: 0 success, 1 acceptance or check failure, 2 configuration or
// input error, 3 solver failure.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <omp.h>

#include "homog/kernels.hpp"
#include "homog/pipeline.hpp"

using namespace homog;

namespace {

constexpr int kPass = 0, kFail = 1, kConfig = 2, kSolver = 3;

Params parse_params(const std::vector<std::string>& items) {
  Params p;
  for (const auto& it : items) {
    const auto eq = it.find('=');
    if (eq == std::string::npos) throw ConfigError("parameter '" + it + "' is not key=value", "config");
    try {
      p[it.substr(0, eq)] = std::stod(it.substr(eq + 1));
    } catch (const std::exception&) {
      throw ConfigError("parameter '" + it + "' has a non-numeric value", "config");
    }
  }
  return p;
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  write_text_atomic(p, text);
}

struct CommonArgs {
  std::string coef = "trig_product";
  std::vector<std::string> params;
  int dim = 1;
  int n = 64;
  int n_y = 0;
  std::string cache;
};

void add_common(CLI::App* app, CommonArgs& a) {
  app->add_option("--coef", a.coef, "coefficient name from the catalog");
  app->add_option("--param", a.params, "coefficient parameter key=value (repeatable)");
  app->add_option("--dim", a.dim, "space dimension (1 or 2)")->check(CLI::Range(1, 2));
  app->add_option("--n", a.n, "cell-grid elements per axis");
  app->add_option("--ny", a.n_y, "y-samples per axis (0: default)");
  app->add_option("--cache", a.cache, "cell cache directory");
}

CellCorrectorSet cells_for(const CommonArgs& a, const CoefficientField& field) {
  CellOptions co;
  co.n = a.n;
  co.n_y = a.n_y > 0 ? a.n_y : (a.dim == 1 ? 32 : 16);
  if (a.cache.empty()) return CellCorrectorSet::build(field, co);
  return cached_cell_set(field, co, a.cache);
}

struct SolveArgs {
  double epsilon = 0.125;
  double gamma = 2.0;
  double delta = 0.0;
  int mesh = 0;
  std::string f = "1";
  std::string fine = "fem";
  std::string sampling = "midpoint";
  int order = 4;
  std::string extension = "even";
  std::string out;
};

void add_solve(CLI::App* app, SolveArgs& s) {
  app->add_option("--epsilon", s.epsilon, "slow period eps")->required();
  app->add_option("--gamma", s.gamma, "delta = eps^gamma");
  app->add_option("--delta", s.delta, "explicit delta (overrides --gamma)");
  app->add_option("--mesh", s.mesh, "elements per axis (0: 8 per delta, power of two)");
  app->add_option("--f", s.f, "forcing modes, e.g. 1 or 1,0");
  app->add_option("--fine", s.fine, "fine solver: fem or quadrature (1D)");
  app->add_option("--sampling", s.sampling, "coefficient sampling: midpoint or harmonic (1D)");
  app->add_option("--order", s.order, "Gauss points per axis for the smoothing");
  app->add_option("--extension", s.extension, "extension beyond the boundary: even or odd");
  app->add_option("--out", s.out, "output file (default stdout)");
}

RunConfig config_from(const CommonArgs& a, const SolveArgs& s) {
  RunConfig c;
  c.coefficient = a.coef;
  c.params = parse_params(a.params);
  c.dim = a.dim;
  c.cell_n = a.n;
  c.cell_n_y = a.n_y;
  c.gamma = s.gamma;
  c.epsilons = {s.epsilon};
  if (s.delta > 0.0) c.deltas = {s.delta};
  if (s.mesh > 0) c.mesh = {s.mesh};
  c.forcing = s.f;
  c.fine_solver = s.fine;
  c.sampling = s.sampling;
  c.quad_order = s.order;
  c.extension = s.extension;
  return c;
}

void require_valid(const RunConfig& c) {
  for (const auto& issue : validate_config(c)) {
    if (issue.warning) {
      if (issue.message.find("three eps") == std::string::npos) std::cerr << "warning: " << issue.message << "\n";
      continue;
    }
    throw ConfigError(issue.message, "config");
  }
}

int cmd_cell(const CommonArgs& a, const std::string& out) {
  const auto field = make_coefficient(a.coef, a.dim, parse_params(a.params));
  const auto cells = cells_for(a, field);
  std::ostringstream os;
  os << (a.dim == 1 ? "y" : "y1,y2");
  os << (a.dim == 1 ? ",a_hat\n" : ",a_hat11,a_hat12,a_hat21,a_hat22\n");
  for (std::size_t s = 0; s < cells.y_samples.size(); ++s) {
    os << g17(cells.y_samples[s][0]);
    if (a.dim == 2) os << ',' << g17(cells.y_samples[s][1]);
    for (int i = 0; i < a.dim; ++i)
      for (int j = 0; j < a.dim; ++j) os << ',' << g17(cells.a_hat.samples[s](i, j));
    os << '\n';
  }
  emit(out.empty() ? "" : out + "/a_hat.csv", os.str());
  std::ostringstream a0;
  a0 << "i,j,a0\n";
  for (int i = 0; i < a.dim; ++i)
    for (int j = 0; j < a.dim; ++j) a0 << i << ',' << j << ',' << g17(cells.a0(i, j)) << '\n';
  emit(out.empty() ? "" : out + "/a0.csv", a0.str());
  return kPass;
}

int cmd_solve(const CommonArgs& a, const SolveArgs& s, bool with_approx) {
  const RunConfig c = config_from(a, s);
  require_valid(c);
  const auto field = make_coefficient(c.coefficient, c.dim, c.params);
  const auto cells = cells_for(a, field);
  const double delta = c.coupling().deltas[0];
  const JobOutput job = run_job(c, field, cells, s.epsilon, delta, c.mesh_for(0));
  const Grid& g = job.u_eps.grid;
  std::ostringstream os;
  os << (g.dim == 1 ? "x" : "x1,x2") << ",u_eps,u";
  if (with_approx) os << ",K1,K2,v_hat";
  os << '\n';
  for (std::size_t k = 0; k < g.num_nodes(); ++k) {
    const Vec x = g.node_point(k);
    os << g17(x[0]);
    if (g.dim == 2) os << ',' << g17(x[1]);
    os << ',' << g17(job.u_eps.values[k]) << ',' << g17(job.u0.values[k]);
    if (with_approx)
      os << ',' << g17(job.approx.K1.values[k]) << ',' << g17(job.approx.K2.values[k]) << ','
         << g17(job.approx.v_hat.values[k]);
    os << '\n';
  }
  emit(s.out, os.str());
  const auto& r = job.record;
  std::cerr << "eps " << r.epsilon << " delta " << r.delta << " mesh " << r.mesh << " |u_eps - u| " << r.l2_error;
  if (with_approx) std::cerr << " |u_eps - v_hat|_H1 " << r.h1_error << " residual " << r.residual_dual_norm;
  std::cerr << (job.under_resolved ? " (under-resolved)" : "") << "\n";
  return kPass;
}

int cmd_report(const std::string& records, const std::string& abscissa, const std::string& out) {
  std::ifstream in(records);
  if (!in) throw ConfigError("cannot open " + records, "report");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto recs = parse_records_csv(ss.str());
  const auto rep = fit_rates(recs, abscissa);
  for (const auto& f : rep.fits)
    std::printf("%-20s slope %.4f +- %.4f (%zu points%s)\n", f.column.c_str(), f.slope, f.half_width, f.points,
                f.noise_floor ? ", at noise floor" : "");
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    write_text_atomic(std::filesystem::path(out) / "report.json", report_json(rep).dump(2) + "\n");
    write_text_atomic(std::filesystem::path(out) / "rates_l2.svg", rates_svg(rep, "l2_error"));
    write_text_atomic(std::filesystem::path(out) / "rates_h1.svg", rates_svg(rep, "h1_error"));
  }
  return kPass;
}

int cmd_sweep(const std::string& path, const std::string& output) {
  RunConfig c = load_config(path);
  if (!output.empty()) c.output = output;
  const PipelineResult res = run_pipeline(c);
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
  std::printf("output %s\n", res.directory.string().c_str());
  for (const auto& f : res.report.fits)
    std::printf("%-20s slope %.4f +- %.4f\n", f.column.c_str(), f.slope, f.half_width);
  for (const auto& cr : res.criteria)
    std::printf("%s %s: %.4f in [%.2f, %.2f]\n", cr.pass ? "PASS" : "FAIL", cr.name.c_str(), cr.value,
                cr.window.lo, cr.window.hi);
  bool solver_failure = false;
  for (const auto& f : res.failures) {
    std::fprintf(stderr, "error [%s] eps %g: %s\n", f.stage.c_str(), f.epsilon, f.message.c_str());
    solver_failure = solver_failure || f.solver;
  }
  if (solver_failure) return kSolver;
  if (!res.failures.empty()) return kConfig;
  return res.pass() ? kPass : kFail;
}

// Quick self-check of the installed build: kernels, catalog and cell invariants.
int cmd_check() {
  int failed = 0;
  auto line = [&](bool ok, const std::string& what) {
    std::printf("%s %s\n", ok ? "PASS" : "FAIL", what.c_str());
    if (!ok) ++failed;
  };

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int dim = 1; dim <= 2; ++dim) {
    const Grid g = Grid::box(dim, 24);
    std::vector<Mat> coef(g.num_elements());
    for (auto& m : coef) {
      m = Mat::identity(dim);
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) m(i, j) += 0.3 * uni(rng);
      for (int i = 0; i < dim; ++i) m(i, i) += 1.0;
    }
    std::vector<double> u(g.num_nodes()), a(u.size()), b(u.size()), scratch(dim * u.size());
    for (double& v : u) v = uni(rng);
    kernels::apply_operator(g, coef, u, a, scratch);
    kernels::serial::apply_operator_reference(g, coef, u, b);
    double diff = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) diff = std::max(diff, std::abs(a[k] - b[k]));
    line(diff < 1e-12, "parallel operator matches serial reference, dim " + std::to_string(dim));
  }

  for (int dim = 1; dim <= 2; ++dim)
    for (const auto& name : catalog_names()) {
      CoefficientField field;
      try {
        field = make_coefficient(name, dim);
      } catch (const ConfigError&) {
        continue;
      }
      line(verify_hypotheses(field, 2000).pass, "hypotheses hold for " + name + " in dim " + std::to_string(dim));
    }

  const auto field = make_coefficient("trig_product", 1);
  const auto cells = CellCorrectorSet::build(field, CellOptions{32, 32, {}});
  line(std::abs(cells.a0(0, 0) - 3.0) < 1e-3, "1D trig_product gives a0 = 3");
  const auto lam = make_coefficient("laminate", 2);
  const auto lc = CellCorrectorSet::build(lam, CellOptions{32, 2, {}});
  line(std::abs(lc.a0(0, 0) - std::sqrt(3.0)) < 1e-3 && std::abs(lc.a0(1, 1) - 2.0) < 1e-9,
       "2D laminate gives a0 = diag(sqrt 3, 2)");
  return failed == 0 ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* t = std::getenv("HOMOG_THREADS")) {
    const int n = std::atoi(t);
    if (n > 0) omp_set_num_threads(n);
  }

  CLI::App app{"Two-scale periodic homogenization: cell problems, fine solves and convergence sweeps"};
  app.require_subcommand(1);

  CommonArgs cell_args;
  std::string cell_out;
  auto* cell = app.add_subcommand("cell", "solve the cell problems and print the a_hat table and a0");
  add_common(cell, cell_args);
  cell->add_option("--out", cell_out, "directory for a_hat.csv and a0.csv (default stdout)");

  CommonArgs solve_common, approx_common;
  SolveArgs solve_args, approx_args;
  auto* solve = app.add_subcommand("solve", "fine and homogenized solutions for one eps");
  add_common(solve, solve_common);
  add_solve(solve, solve_args);
  auto* approx = app.add_subcommand("approx", "the smoothed first-order approximation for one eps");
  add_common(approx, approx_common);
  add_solve(approx, approx_args);

  std::string records, abscissa = "tau", report_out;
  auto* report = app.add_subcommand("report", "fit convergence rates from a records file");
  report->add_option("records", records, "records.csv from a sweep")->required();
  report->add_option("--abscissa", abscissa, "tau or epsilon");
  report->add_option("--out", report_out, "directory for report.json and plots");

  std::string config, output;
  auto* sweep = app.add_subcommand("sweep", "run a convergence sweep from a JSON config");
  sweep->add_option("config", config, "config file")->required();
  sweep->add_option("--output", output, "override the output directory");

  auto* check = app.add_subcommand("check", "self-check of kernels, catalog and cell invariants");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfig;
  }

  try {
    if (*cell) return cmd_cell(cell_args, cell_out);
    if (*solve) return cmd_solve(solve_common, solve_args, false);
    if (*approx) return cmd_solve(approx_common, approx_args, true);
    if (*report) return cmd_report(records, abscissa, report_out);
    if (*sweep) return cmd_sweep(config, output);
    if (*check) return cmd_check();
  } catch (const SolverError& e) {
    std::cerr << "solver error [" << e.stage() << "]: " << e.what() << "\n";
    return kSolver;
  } catch (const QuadratureError& e) {
    std::cerr << "quadrature error [" << e.stage() << "]: " << e.what() << "\n";
    return kSolver;
  } catch (const ConfigError& e) {
    std::cerr << "config error [" << (e.stage().empty() ? "config" : e.stage()) << "]: " << e.what() << "\n";
    return kConfig;
  } catch (const InputError& e) {
    std::cerr << "input error [" << e.stage() << "]: " << e.what() << "\n";
    return kConfig;
  } catch (const Error& e) {
    std::cerr << "error [" << e.stage() << "]: " << e.what() << "\n";
    return kSolver;
  }
  return kPass;
}
