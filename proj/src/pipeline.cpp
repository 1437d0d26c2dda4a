#include "homog/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "homog/util.hpp"

namespace homog {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Column keys and their meaning; headers carry both so the CSV is self-describing.
const std::vector<std::pair<std::string, std::string>>& csv_columns() {
  static const std::vector<std::pair<std::string, std::string>> cols = {
      {"epsilon", "eps"},
      {"delta", "delta"},
      {"tau", "max(eps; delta/eps)"},
      {"mesh", "elements per axis"},
      {"l2_error", "|u_eps - u|_L2"},
      {"h1_error", "|u_eps - v_hat|_H1"},
      {"boundary_grad", "int_{dist(x; boundary) < eps} |grad u_eps|^2"},
      {"residual_dual_norm", "sup_phi int R . grad phi / |grad phi|"},
      {"f_norm", "|f|_L2"},
      {"k_norm", "|eps K1 + delta K2|_L2"},
  };
  return cols;
}

template <class T>
T take(json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  T v = j.at(key).get<T>();
  j.erase(key);
  return v;
}

void reject_unknown(const json& j, const std::string& where) {
  if (!j.empty()) throw ConfigError("unknown key '" + j.begin().key() + "' in " + where, "config");
}

std::optional<SlopeWindow> take_window(json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  const auto v = j.at(key).get<std::vector<double>>();
  j.erase(key);
  if (v.size() != 2) throw ConfigError(std::string(key) + " must be [lo, hi]", "config");
  return SlopeWindow{v[0], v[1]};
}

GridField combine(const GridField& a, double sa, const GridField& b, double sb) {
  GridField out(a.grid);
  for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = sa * a.values[k] + sb * b.values[k];
  return out;
}

std::string fields_csv(const JobOutput& job) {
  const Grid& g = job.u_eps.grid;
  std::ostringstream os;
  os << (g.dim == 1 ? "x" : "x1,x2") << ",u_eps,u,v_hat,K1,K2\n";
  for (std::size_t k = 0; k < g.num_nodes(); ++k) {
    const Vec x = g.node_point(k);
    os << fmt(x[0]);
    if (g.dim == 2) os << ',' << fmt(x[1]);
    os << ',' << fmt(job.u_eps.values[k]) << ',' << fmt(job.u0.values[k]) << ','
       << fmt(job.approx.v_hat.values[k]) << ',' << fmt(job.approx.K1.values[k]) << ','
       << fmt(job.approx.K2.values[k]) << '\n';
  }
  return os.str();
}

json mat_json(const Mat& a, int dim) {
  json rows = json::array();
  for (int i = 0; i < dim; ++i) {
    json r = json::array();
    for (int j = 0; j < dim; ++j) r.push_back(a(i, j));
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

ScaleCoupling RunConfig::coupling() const {
  return deltas.empty() ? ScaleCoupling::power_law(gamma, epsilons) : ScaleCoupling::from_table(epsilons, deltas);
}

int RunConfig::mesh_for(std::size_t i) const {
  if (!mesh.empty()) return mesh.at(i);
  const double delta = coupling().deltas.at(i);
  int m = 4;
  while (m < points_per_delta / delta * length) m *= 2;
  return m;
}

RunConfig parse_config(const json& input) {
  if (!input.is_object()) throw ConfigError("config must be a JSON object", "config");
  json j = input;
  RunConfig c;
  try {
    if (j.contains("coefficient")) {
      json co = j.at("coefficient");
      j.erase("coefficient");
      if (co.is_string()) {
        c.coefficient = co.get<std::string>();
      } else {
        c.coefficient = take<std::string>(co, "name", c.coefficient);
        c.params = take<Params>(co, "params", {});
        reject_unknown(co, "coefficient");
      }
    }
    c.dim = take(j, "dim", c.dim);
    if (j.contains("coupling")) {
      json cp = j.at("coupling");
      j.erase("coupling");
      c.gamma = take(cp, "gamma", c.gamma);
      c.epsilons = take<std::vector<double>>(cp, "epsilons", {});
      c.deltas = take<std::vector<double>>(cp, "deltas", {});
      reject_unknown(cp, "coupling");
    }
    if (j.contains("cell")) {
      json ce = j.at("cell");
      j.erase("cell");
      c.cell_n = take(ce, "n", c.cell_n);
      c.cell_n_y = take(ce, "n_y", c.cell_n_y);
      reject_unknown(ce, "cell");
    }
    if (j.contains("mesh")) {
      json me = j.at("mesh");
      j.erase("mesh");
      if (me.is_array()) {
        c.mesh = me.get<std::vector<int>>();
      } else {
        c.points_per_delta = take(me, "points_per_delta", c.points_per_delta);
        c.mesh = take<std::vector<int>>(me, "resolutions", {});
        reject_unknown(me, "mesh");
      }
    }
    c.length = take(j, "length", c.length);
    c.forcing = take<std::string>(j, "forcing", c.forcing);
    c.quad_order = take(j, "quadrature_order", c.quad_order);
    c.extension = take<std::string>(j, "extension", c.extension);
    if (j.contains("fine")) {
      json fi = j.at("fine");
      j.erase("fine");
      c.fine_solver = take<std::string>(fi, "solver", c.fine_solver);
      c.sampling = take<std::string>(fi, "sampling", c.sampling);
      reject_unknown(fi, "fine");
    }
    c.solver_tol = take(j, "solver_tol", c.solver_tol);
    c.abscissa = take<std::string>(j, "abscissa", c.abscissa);
    if (j.contains("acceptance")) {
      json ac = j.at("acceptance");
      j.erase("acceptance");
      c.l2_slope = take_window(ac, "l2_slope");
      c.h1_slope = take_window(ac, "h1_slope");
      reject_unknown(ac, "acceptance");
    }
    c.output = take<std::string>(j, "output", c.output.string());
    c.write_fields = take(j, "write_fields", c.write_fields);
    c.seed = take<std::uint64_t>(j, "seed", c.seed);
    reject_unknown(j, "config");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what(), "config");
  }
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string(), "config");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()), "config");
  }
  return parse_config(j);
}

json canonical_json(const RunConfig& c) {
  json j;
  j["coefficient"] = {{"name", c.coefficient}, {"params", c.params}};
  j["dim"] = c.dim;
  j["coupling"] = {{"gamma", c.gamma}, {"epsilons", c.epsilons}, {"deltas", c.deltas}};
  j["cell"] = {{"n", c.cell_n}, {"n_y", c.cell_samples()}};
  j["mesh"] = {{"points_per_delta", c.points_per_delta}, {"resolutions", c.mesh}};
  j["length"] = c.length;
  j["forcing"] = c.forcing;
  j["quadrature_order"] = c.quad_order;
  j["extension"] = c.extension;
  j["fine"] = {{"solver", c.fine_solver}, {"sampling", c.sampling}};
  j["solver_tol"] = c.solver_tol;
  j["abscissa"] = c.abscissa;
  if (c.l2_slope) j["acceptance"]["l2_slope"] = {c.l2_slope->lo, c.l2_slope->hi};
  if (c.h1_slope) j["acceptance"]["h1_slope"] = {c.h1_slope->lo, c.h1_slope->hi};
  j["write_fields"] = c.write_fields;
  j["seed"] = c.seed;
  return j;
}

std::string config_hash(const RunConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical_json(c).dump())));
  return buf;
}

std::vector<ConfigIssue> validate_config(const RunConfig& c) {
  std::vector<ConfigIssue> out;
  auto error = [&](std::string m) { out.push_back({false, std::move(m)}); };
  auto warn = [&](std::string m) { out.push_back({true, std::move(m)}); };

  if (c.dim != 1 && c.dim != 2) {
    error("dim must be 1 or 2");
    return out;
  }
  try {
    make_coefficient(c.coefficient, c.dim, c.params);
  } catch (const Error& e) {
    error(e.what());
  }
  if (c.epsilons.empty()) error("coupling.epsilons is empty");
  for (double e : c.epsilons)
    if (!(e > 0.0 && e < 1.0)) error("every eps must lie in (0, 1)");
  for (std::size_t i = 1; i < c.epsilons.size(); ++i)
    if (!(c.epsilons[i] < c.epsilons[i - 1])) {
      error("epsilons must be strictly decreasing");
      break;
    }
  if (c.epsilons.size() < 3) warn("fewer than three eps values; no rates will be fitted");

  if (c.deltas.empty()) {
    if (!(c.gamma > 1.0)) error("delta/eps does not vanish: gamma must exceed 1");
  } else if (c.deltas.size() != c.epsilons.size()) {
    error("coupling.deltas and coupling.epsilons differ in length");
  } else {
    for (double d : c.deltas)
      if (!(d > 0.0)) error("every delta must be positive");
    if (!c.coupling().ratio_decreasing()) error("delta/eps does not vanish: the ratio must decrease along the table");
  }
  if (!c.mesh.empty() && c.mesh.size() != c.epsilons.size()) error("mesh.resolutions and epsilons differ in length");
  if (!(c.length > 0.0)) error("length must be positive");
  if (c.cell_n < 4) error("cell.n must be at least 4");
  if (c.cell_n_y < 0) error("cell.n_y must be nonnegative");
  if (!(c.points_per_delta > 0.0)) error("mesh.points_per_delta must be positive");
  if (!(c.solver_tol > 0.0 && c.solver_tol < 1.0)) error("solver_tol must lie in (0, 1)");
  if (c.abscissa != "tau" && c.abscissa != "epsilon") error("abscissa must be tau or epsilon");
  if (c.fine_solver != "quadrature" && c.fine_solver != "fem") error("fine.solver must be quadrature or fem");
  if (c.fine_solver == "quadrature" && c.dim != 1) error("fine.solver quadrature exists only in 1D");
  try {
    if (parse_sampling(c.sampling) == CoefficientSampling::harmonic && c.dim != 1)
      error("fine.sampling harmonic exists only in 1D");
  } catch (const Error& e) {
    error(e.what());
  }
  try {
    cell_rule(c.quad_order);
    parse_extension(c.extension);
    Forcing::parse(c.forcing, c.dim, c.length);
  } catch (const Error& e) {
    error(e.what());
  }
  for (const auto& w : {c.l2_slope, c.h1_slope})
    if (w && !(w->lo <= w->hi)) error("acceptance window must have lo <= hi");

  const bool shape_ok = std::none_of(out.begin(), out.end(), [](const ConfigIssue& i) { return !i.warning; });
  if (shape_ok) {
    const ScaleCoupling sc = c.coupling();
    for (std::size_t i = 0; i < sc.size(); ++i) {
      const int m = c.mesh_for(i);
      const double h = c.length / m;
      if (m < 2) {
        error("mesh resolution must be at least 2");
        continue;
      }
      if (h > sc.epsilons[i] * (1.0 + 1e-12))
        error("mesh for eps = " + fmt(sc.epsilons[i]) + " cannot resolve the eps boundary layer (h > eps)");
      else if (h > sc.deltas[i] / 8.0 * (1.0 + 1e-12))
        warn("mesh for eps = " + fmt(sc.epsilons[i]) + " is under-resolved (h > delta/8)");
    }
  }
  return out;
}

bool PipelineResult::pass() const {
  return failures.empty() && std::all_of(criteria.begin(), criteria.end(), [](const auto& c) { return c.pass; });
}

JobOutput run_job(const RunConfig& c, const CoefficientField& field, const CellCorrectorSet& cells,
                  double eps, double delta, int m) {
  const DomainMesh mesh = DomainMesh::make(c.dim, m, c.length);
  const Forcing forcing = Forcing::parse(c.forcing, c.dim, c.length);
  const GridField f = forcing.sample(mesh);
  const SolverOptions opts{c.solver_tol};
  const CoefficientSampling sampling = parse_sampling(c.sampling);

  JobOutput job;
  job.under_resolved = mesh.h() > delta / 8.0 * (1.0 + 1e-12);
  job.u0 = solve_homogenized(cells.a0, f, opts).solution.u;
  if (c.fine_solver == "quadrature") {
    const ExactFine1D exact(field, eps, delta, forcing);
    job.u_eps = GridField(mesh.grid, exact.nodal(mesh));
  } else {
    job.u_eps = solve_fine(field, eps, delta, f, opts, sampling).u;
  }
  SmoothingOptions so;
  so.order = c.quad_order;
  so.extension = parse_extension(c.extension);
  job.approx = first_approx_smoothed(job.u0, cells, eps, delta, so);

  ErrorRecord& r = job.record;
  r.epsilon = eps;
  r.delta = delta;
  r.tau = tau_of(eps, delta);
  r.mesh = m;
  r.l2_error = l2_norm(combine(job.u_eps, 1.0, job.u0, -1.0));
  r.h1_error = h1_norm(combine(job.u_eps, 1.0, job.approx.v_hat, -1.0));
  r.boundary_grad = boundary_layer_grad2(job.u_eps, eps);
  r.residual_dual_norm =
      residual_dual_norm(residual_field(field, eps, delta, job.approx, cells.a0, sampling), SolverOptions{1e-12});
  r.f_norm = l2_norm(f);
  r.k_norm = l2_norm(combine(job.approx.K1, eps, job.approx.K2, delta));
  job.boundary_layer = boundary_layer_check(job.u_eps, eps, delta, r.f_norm);
  const double scale = std::max(eps, delta) * r.f_norm;
  job.corrector_ratio = scale > 0.0 ? r.k_norm / scale : 0.0;
  return job;
}

PipelineResult run_pipeline(const RunConfig& c) {
  PipelineResult res;
  for (const auto& issue : validate_config(c)) {
    if (!issue.warning) throw ConfigError(issue.message, "config");
    res.warnings.push_back(issue.message);
  }
  const CoefficientField field = make_coefficient(c.coefficient, c.dim, c.params);
  res.directory = c.output / config_hash(c);
  fs::create_directories(res.directory);

  CellOptions co;
  co.n = c.cell_n;
  co.n_y = c.cell_samples();
  co.solver.rel_tol = c.solver_tol;
  CellCorrectorSet cells;
  try {
    cells = cached_cell_set(field, co, res.directory / "cell");
  } catch (Error& e) {
    if (e.stage().empty()) e.set_stage("cell");
    throw;
  }
  res.a0 = cells.a0;

  const ScaleCoupling sc = c.coupling();
  const std::size_t jobs = sc.size();
  std::vector<std::optional<JobOutput>> outputs(jobs);
  std::vector<std::optional<JobFailure>> failed(jobs);
  const fs::path fields_dir = res.directory / "fields";
  if (c.write_fields) fs::create_directories(fields_dir);

#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(jobs); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    try {
      JobOutput job = run_job(c, field, cells, sc.epsilons[i], sc.deltas[i], c.mesh_for(i));
      if (c.write_fields) {
        char name[32];
        std::snprintf(name, sizeof name, "eps_%02zu", i);
        const fs::path tmp = fields_dir / (std::string(".") + name + ".tmp");
        const fs::path dst = fields_dir / name;
        fs::remove_all(tmp);
        fs::create_directories(tmp);
        std::ofstream(tmp / "fields.csv") << fields_csv(job);
        fs::remove_all(dst);
        fs::rename(tmp, dst);
      }
      outputs[i] = std::move(job);
    } catch (const SolverError& e) {
      failed[i] = JobFailure{sc.epsilons[i], e.stage().empty() ? "solve" : e.stage(), e.what(), true};
    } catch (const Error& e) {
      failed[i] = JobFailure{sc.epsilons[i], e.stage().empty() ? "job" : e.stage(), e.what(), false};
    } catch (const std::exception& e) {
      failed[i] = JobFailure{sc.epsilons[i], "job", e.what(), false};
    }
  }

  std::vector<ErrorRecord> records;
  for (std::size_t i = 0; i < jobs; ++i) {
    if (failed[i]) res.failures.push_back(*failed[i]);
    if (!outputs[i]) continue;
    records.push_back(outputs[i]->record);
    res.boundary_layer_ratios.push_back(outputs[i]->boundary_layer);
    res.corrector_ratios.push_back(outputs[i]->corrector_ratio);
    res.under_resolved.push_back(outputs[i]->under_resolved);
  }
  res.report.records = records;
  if (records.size() >= 3) {
    res.report = fit_rates(records, c.abscissa);
    res.fitted = true;
  }

  auto check = [&](const char* name, const char* column, const std::optional<SlopeWindow>& w) {
    if (!w) return;
    CriterionResult cr;
    cr.name = name;
    cr.window = *w;
    for (const auto& f : res.report.fits)
      if (f.column == column) {
        cr.value = f.slope;
        cr.pass = !f.noise_floor && f.slope >= w->lo && f.slope <= w->hi;
      }
    res.criteria.push_back(cr);
  };
  check("l2_slope", "l2_error", c.l2_slope);
  check("h1_slope", "h1_error", c.h1_slope);

  write_text_atomic(res.directory / "records.csv", records_csv(records));
  json rep = report_json(res.report);
  rep["config"] = canonical_json(c);
  rep["config_hash"] = config_hash(c);
  rep["a0"] = mat_json(res.a0, c.dim);
  rep["cell"] = {{"n", cells.n}, {"n_y", cells.n_y}, {"max_iterations", cells.max_iterations}};
  rep["boundary_layer_ratio"] = res.boundary_layer_ratios;
  rep["corrector_ratio"] = res.corrector_ratios;
  rep["under_resolved"] = res.under_resolved;
  rep["warnings"] = res.warnings;
  json crit = json::array();
  for (const auto& cr : res.criteria)
    crit.push_back({{"name", cr.name}, {"slope", cr.value}, {"window", {cr.window.lo, cr.window.hi}}, {"pass", cr.pass}});
  rep["criteria"] = crit;
  json fails = json::array();
  for (const auto& f : res.failures)
    fails.push_back({{"epsilon", f.epsilon}, {"stage", f.stage}, {"message", f.message}});
  rep["failures"] = fails;
  write_text_atomic(res.directory / "report.json", rep.dump(2) + "\n");
  if (res.fitted) {
    write_text_atomic(res.directory / "rates_l2.svg", rates_svg(res.report, "l2_error"));
    write_text_atomic(res.directory / "rates_h1.svg", rates_svg(res.report, "h1_error"));
  }
  return res;
}

std::string records_csv(const std::vector<ErrorRecord>& records) {
  std::ostringstream os;
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i)
    os << (i ? "," : "") << cols[i].first << " = " << cols[i].second;
  os << '\n';
  for (const auto& r : records) {
    os << fmt(r.epsilon) << ',' << fmt(r.delta) << ',' << fmt(r.tau) << ',' << r.mesh << ',' << fmt(r.l2_error)
       << ',' << fmt(r.h1_error) << ',' << fmt(r.boundary_grad) << ',' << fmt(r.residual_dual_norm) << ','
       << fmt(r.f_norm) << ',' << fmt(r.k_norm) << '\n';
  }
  return os.str();
}

std::vector<ErrorRecord> parse_records_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InputError("records file is empty", "report");
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    return out;
  };
  std::vector<std::string> keys;
  for (auto tok : split(line)) {
    const auto eq = tok.find(" =");
    keys.push_back(tok.substr(0, eq));
  }
  std::vector<ErrorRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto vals = split(line);
    if (vals.size() != keys.size()) throw InputError("records row has the wrong number of columns", "report");
    ErrorRecord r;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      double v = 0.0;
      try {
        v = std::stod(vals[i]);
      } catch (const std::exception&) {
        throw InputError("unparsable value '" + vals[i] + "' in records", "report");
      }
      const std::string& k = keys[i];
      if (k == "epsilon") r.epsilon = v;
      else if (k == "delta") r.delta = v;
      else if (k == "tau") r.tau = v;
      else if (k == "mesh") r.mesh = static_cast<int>(v);
      else if (k == "l2_error") r.l2_error = v;
      else if (k == "h1_error") r.h1_error = v;
      else if (k == "boundary_grad") r.boundary_grad = v;
      else if (k == "residual_dual_norm") r.residual_dual_norm = v;
      else if (k == "f_norm") r.f_norm = v;
      else if (k == "k_norm") r.k_norm = v;
    }
    out.push_back(r);
  }
  return out;
}

json report_json(const ConvergenceReport& rep) {
  json j;
  json recs = json::array();
  for (const auto& r : rep.records)
    recs.push_back({{"epsilon", r.epsilon},
                    {"delta", r.delta},
                    {"tau", r.tau},
                    {"mesh", r.mesh},
                    {"l2_error", r.l2_error},
                    {"h1_error", r.h1_error},
                    {"boundary_grad", r.boundary_grad},
                    {"residual_dual_norm", r.residual_dual_norm},
                    {"f_norm", r.f_norm},
                    {"k_norm", r.k_norm}});
  j["records"] = recs;
  json fits = json::array();
  for (const auto& f : rep.fits)
    fits.push_back({{"column", f.column},
                    {"abscissa", f.abscissa},
                    {"slope", f.slope},
                    {"intercept", f.intercept},
                    {"ci95_half_width", f.half_width},
                    {"points", f.points},
                    {"noise_floor", f.noise_floor}});
  j["fits"] = fits;
  return j;
}

std::string rates_svg(const ConvergenceReport& rep, const std::string& column) {
  const RateFit* fit = nullptr;
  for (const auto& f : rep.fits)
    if (f.column == column) fit = &f;
  const bool use_tau = !fit || fit->abscissa == "tau";
  std::vector<double> lx, ly;
  for (const auto& r : rep.records) {
    const double y = column == "l2_error" ? r.l2_error : column == "h1_error" ? r.h1_error : r.residual_dual_norm;
    if (!(y > 0.0)) continue;
    lx.push_back(std::log10(use_tau ? r.tau : r.epsilon));
    ly.push_back(std::log10(y));
  }
  const double W = 480, H = 360, pad = 50;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!lx.empty()) {
    x0 = *std::min_element(lx.begin(), lx.end()) - 0.1;
    x1 = *std::max_element(lx.begin(), lx.end()) + 0.1;
    y0 = *std::min_element(ly.begin(), ly.end()) - 0.2;
    y1 = *std::max_element(ly.begin(), ly.end()) + 0.2;
  }
  auto px = [&](double v) { return pad + (v - x0) / (x1 - x0) * (W - 2 * pad); };
  auto py = [&](double v) { return H - pad - (v - y0) / (y1 - y0) * (H - 2 * pad); };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << pad << "\" y1=\"" << H - pad << "\" x2=\"" << W - pad << "\" y2=\"" << H - pad
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << H - pad
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">log10 "
     << (use_tau ? "tau" : "eps") << "</text>\n";
  os << "<text x=\"14\" y=\"" << H / 2 << "\" transform=\"rotate(-90 14 " << H / 2
     << ")\" text-anchor=\"middle\">log10 " << column << "</text>\n";
  for (std::size_t i = 0; i < lx.size(); ++i)
    os << "<circle cx=\"" << fmt(px(lx[i])) << "\" cy=\"" << fmt(py(ly[i])) << "\" r=\"4\" fill=\"steelblue\"/>\n";
  if (fit && !lx.empty()) {
    const double l10 = std::log(10.0);
    auto line = [&](double x) { return (fit->intercept / l10) + fit->slope * x; };
    os << "<line x1=\"" << fmt(px(x0)) << "\" y1=\"" << fmt(py(line(x0))) << "\" x2=\"" << fmt(px(x1))
       << "\" y2=\"" << fmt(py(line(x1))) << "\" stroke=\"firebrick\"/>\n";
    char label[64];
    std::snprintf(label, sizeof label, "slope %.3f +- %.3f", fit->slope, fit->half_width);
    os << "<text x=\"" << pad + 10 << "\" y=\"" << pad << "\">" << label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + tmp.string(), "output");
    out << text;
  }
  fs::rename(tmp, path);
}

}  // namespace homog
