#include "homog/cellsolve.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "homog/kernels.hpp"
#include "homog/util.hpp"

namespace homog {

namespace {

EllipticOperator laplacian(const Grid& g) {
  return EllipticOperator(g, std::vector<Mat>(g.num_elements(), Mat::identity(g.dim)));
}

double edge_l2(const EdgeField& v) {
  double s = 0.0;
  for (int i = 0; i < v.grid.dim; ++i)
    for (std::size_t k = 0; k < v.grid.num_nodes(); ++k)
      s += v.grid.edge_volume(k, i) * v.comp[i][k] * v.comp[i][k];
  return std::sqrt(s);
}

void check_axis(int j, int dim) {
  if (j < 0 || j >= dim) throw InputError("axis index out of range");
}

void check_resolution(int n) {
  if (n < 4) throw InputError("cell resolution must be at least 4");
}

}  // namespace

std::vector<Vec> y_sample_points(int dim, int n_y) {
  const std::size_t count = dim == 1 ? static_cast<std::size_t>(n_y)
                                     : static_cast<std::size_t>(n_y) * static_cast<std::size_t>(n_y);
  std::vector<Vec> pts(count);
  for (std::size_t s = 0; s < count; ++s) {
    const auto i0 = static_cast<int>(s % static_cast<std::size_t>(n_y));
    const auto i1 = static_cast<int>(s / static_cast<std::size_t>(n_y));
    pts[s][0] = -0.5 + (i0 + 0.5) / n_y;
    if (dim == 2) pts[s][1] = -0.5 + (i1 + 0.5) / n_y;
  }
  return pts;
}

PeriodicLattice y_sample_lattice(int dim, int n_y) {
  return PeriodicLattice{dim, n_y, -0.5, 1.0 / n_y, 0.5};
}

Mat AHatTable::operator()(const Vec& y) const {
  const auto st = y_sample_lattice(dim, n_y).stencil(y);
  Mat a;
  for (int c = 0; c < st.size; ++c) a = a + samples[st.index[c]] * st.weight[c];
  return a;
}

std::vector<Mat> sample_z_coefficients(const CoefficientField& field, const Vec& y,
                                       const Grid& z_grid) {
  std::vector<Mat> coef(z_grid.num_elements());
  for (std::size_t e = 0; e < coef.size(); ++e) coef[e] = evaluate(field, y, z_grid.element_midpoint(e));
  return coef;
}

EdgeField flux_density(const EllipticOperator& op, const GridField& u, const Vec& background) {
  const Grid& g = op.grid();
  const auto w = op.flux_moments(u.values, background);
  EdgeField f(g);
  const std::size_t nn = g.num_nodes();
  for (int i = 0; i < g.dim; ++i)
    for (std::size_t k = 0; k < nn; ++k) {
      const double vol = g.edge_volume(k, i);
      f.comp[i][k] = vol > 0.0 ? w[static_cast<std::size_t>(i) * nn + k] / vol : 0.0;
    }
  return f;
}

namespace {

GridField solve_cell(const EllipticOperator& op, int j, const SolverOptions& opts, SolveStats* stats) {
  const Grid& g = op.grid();
  const std::size_t nn = g.num_nodes();
  // A M = -B(z_j, .), the load of the background gradient e^j.
  const auto w0 = op.flux_moments(std::vector<double>(nn, 0.0), unit_vector(j));
  std::vector<double> rhs(nn);
  kernels::moment_divergence(g, w0, rhs);
  for (double& r : rhs) r = -r;
  return GridField(g, op.solve(rhs, opts, stats));
}

}  // namespace

GridField solve_z_cell(const CoefficientField& field, const Vec& y, int j, int n,
                       const SolverOptions& opts, SolveStats* stats) {
  check_axis(j, field.dim);
  check_resolution(n);
  const Grid g = Grid::cell(field.dim, n);
  const EllipticOperator op(g, sample_z_coefficients(field, y, g));
  return solve_cell(op, j, opts, stats);
}

Mat intermediate_matrix(const CoefficientField& field, const Vec& y, std::span<const GridField> M) {
  if (M.size() < static_cast<std::size_t>(field.dim)) throw InputError("need one corrector per axis");
  const Grid& g = M[0].grid;
  const EllipticOperator op(g, sample_z_coefficients(field, y, g));
  Mat a;
  for (int j = 0; j < field.dim; ++j) {
    const EdgeField flux = flux_density(op, M[static_cast<std::size_t>(j)], unit_vector(j));
    for (int i = 0; i < field.dim; ++i) a(i, j) = flux.mean(i);
  }
  return a;
}

namespace {

EllipticOperator y_operator(const AHatTable& a_hat, const Grid& g) {
  std::vector<Mat> coef(g.num_elements());
  for (std::size_t e = 0; e < coef.size(); ++e) coef[e] = a_hat(g.element_midpoint(e));
  return EllipticOperator(g, std::move(coef));
}

}  // namespace

GridField solve_y_cell(const AHatTable& a_hat, int j, int n, const SolverOptions& opts,
                       SolveStats* stats) {
  check_axis(j, a_hat.dim);
  check_resolution(n);
  return solve_cell(y_operator(a_hat, Grid::cell(a_hat.dim, n)), j, opts, stats);
}

Mat homogenized_matrix(const AHatTable& a_hat, std::span<const GridField> N) {
  if (N.size() < static_cast<std::size_t>(a_hat.dim)) throw InputError("need one corrector per axis");
  const EllipticOperator op = y_operator(a_hat, N[0].grid);
  Mat a;
  for (int j = 0; j < a_hat.dim; ++j) {
    const EdgeField flux = flux_density(op, N[static_cast<std::size_t>(j)], unit_vector(j));
    for (int i = 0; i < a_hat.dim; ++i) a(i, j) = flux.mean(i);
  }
  return a;
}

namespace {

EdgeField subtract_column(EdgeField flux, const Mat& a, int j) {
  for (int i = 0; i < flux.grid.dim; ++i)
    for (double& v : flux.comp[i]) v -= a(i, j);
  return flux;
}

}  // namespace

EdgeField flux_vectors(const CoefficientField& field, const Vec& y, const GridField& M_j,
                       const Mat& a_hat, int j) {
  const EllipticOperator op(M_j.grid, sample_z_coefficients(field, y, M_j.grid));
  return subtract_column(flux_density(op, M_j, unit_vector(j)), a_hat, j);
}

EdgeField flux_vectors_slow(const AHatTable& a_hat, const GridField& N_j, const Mat& a0, int j) {
  const EllipticOperator op = y_operator(a_hat, N_j.grid);
  return subtract_column(flux_density(op, N_j, unit_vector(j)), a0, j);
}

double weak_divergence_residual(const EdgeField& v) {
  const Grid& g = v.grid;
  const std::size_t nn = g.num_nodes();
  const double h = g.h();
  const double vol = g.element_volume();
  // <D^- . v, chi> with lumped weights; its Riesz representer w solves A w = M r.
  std::vector<double> load(nn, 0.0);
  for (std::size_t k = 0; k < nn; ++k) {
    double r = 0.0;
    for (int i = 0; i < g.dim; ++i) {
      const long prev = g.neighbour(k, i, -1);
      r += (v.comp[i][k] - v.comp[i][static_cast<std::size_t>(prev)]) / h;
    }
    load[k] = vol * r;
  }
  const EllipticOperator lap = laplacian(g);
  const auto w = lap.solve(load, SolverOptions{1e-12});
  return std::sqrt(std::max(0.0, lap.form(w, w)));
}

EdgeField skew_divergence(const SkewField& s) {
  const Grid& g = s.grid;
  EdgeField out(g);
  if (g.dim == 1) return out;
  const double h = g.h();
  for (std::size_t k = 0; k < g.num_nodes(); ++k) {
    const auto km = g.node_multi(k);
    const std::size_t here = g.element_index(km[0], km[1]);
    const std::size_t below = g.element_index(km[0], g.wrap(km[1] - 1));
    const std::size_t left = g.element_index(g.wrap(km[0] - 1), km[1]);
    // (div S)_1 = D_2^- S_21 = -D_2^- S_12, (div S)_2 = D_1^- S_12
    out.comp[0][k] = -(s.upper[here] - s.upper[below]) / h;
    out.comp[1][k] = (s.upper[here] - s.upper[left]) / h;
  }
  return out;
}

PotentialResult solve_potential(const EdgeField& v, const SolverOptions& opts, double scale) {
  const Grid& g = v.grid;
  if (!g.periodic) throw InputError("potentials are defined on periodic cells");
  for (int i = 0; i < g.dim; ++i)
    for (double x : v.comp[i]) scale = std::max(scale, std::abs(x));
  for (int i = 0; i < g.dim; ++i) {
    const double m = v.mean(i);
    if (std::abs(m) > 1e-10 * scale) {
      std::ostringstream os;
      os << "potential input has nonzero mean " << m << " in component " << i + 1;
      throw InputError(os.str());
    }
  }

  PotentialResult res;
  res.matrix = SkewField(g);
  const EllipticOperator lap = laplacian(g);
  const double vol = g.element_volume();
  for (int k = 0; k < g.dim; ++k) {
    // A phi = -h^d v  <=>  discrete Laplace phi = v
    std::vector<double> rhs(g.num_nodes());
    for (std::size_t n = 0; n < rhs.size(); ++n) rhs[n] = -vol * v.comp[k][n];
    res.phi[static_cast<std::size_t>(k)] = GridField(g, lap.solve(rhs, opts));
  }
  if (g.dim == 2) {
    const double h = g.h();
    const auto& p1 = res.phi[0].values;
    const auto& p2 = res.phi[1].values;
    for (std::size_t e = 0; e < g.num_elements(); ++e) {
      const std::size_t k = g.element_node(e, 0, 0);
      const std::size_t k1 = g.element_node(e, 1, 0);
      const std::size_t k2 = g.element_node(e, 0, 1);
      res.matrix.upper[e] = ((p2[k1] - p2[k]) - (p1[k2] - p1[k])) / h;
    }
  }

  EdgeField diff = skew_divergence(res.matrix);
  for (int i = 0; i < g.dim; ++i)
    for (std::size_t k = 0; k < g.num_nodes(); ++k) diff.comp[i][k] -= v.comp[i][k];
  res.divergence_residual = edge_l2(diff);

  const double v_norm = edge_l2(v);
  if (v_norm > 0.0 && g.dim == 2) {
    // both off-diagonal entries count
    double l2 = 0.0, grad = 0.0;
    const double h = g.h();
    for (std::size_t e = 0; e < g.num_elements(); ++e) {
      const auto em = g.element_multi(e);
      const double s = res.matrix.upper[e];
      const double s0 = res.matrix.upper[g.element_index(g.wrap(em[0] + 1), em[1])];
      const double s1 = res.matrix.upper[g.element_index(em[0], g.wrap(em[1] + 1))];
      l2 += s * s;
      grad += ((s0 - s) / h) * ((s0 - s) / h) + ((s1 - s) / h) * ((s1 - s) / h);
    }
    res.h1_ratio = std::sqrt(2.0 * vol * (l2 + grad)) / v_norm;
  }
  return res;
}

double periodic_h1_norm(const GridField& u) {
  const Grid& g = u.grid;
  double l2 = 0.0;
  for (std::size_t k = 0; k < g.num_nodes(); ++k) l2 += g.node_weight(k) * u.values[k] * u.values[k];
  const EllipticOperator lap = laplacian(g);
  return std::sqrt(l2 + lap.form(u.values, u.values));
}

double corrector_gradient_norm(const GridField& u, int j) {
  const Grid& g = u.grid;
  const double h = g.h();
  double s = 0.0;
  for (int i = 0; i < g.dim; ++i)
    for (std::size_t k = 0; k < g.num_nodes(); ++k) {
      const long next = g.neighbour(k, i, +1);
      if (next < 0) continue;
      const double d = (i == j ? 1.0 : 0.0) + (u.values[static_cast<std::size_t>(next)] - u.values[k]) / h;
      s += g.edge_volume(k, i) * d * d;
    }
  return std::sqrt(s);
}

double lipschitz_check_M(const CoefficientField& field, int j, const Vec& y, const Vec& dy, int n,
                         const SolverOptions& opts) {
  const double step = norm(dy);
  if (!(step > 0.0)) throw InputError("lipschitz_check_M needs a nonzero step");
  const GridField a = solve_z_cell(field, y, j, n, opts);
  GridField b = solve_z_cell(field, y + dy, j, n, opts);
  for (std::size_t k = 0; k < b.values.size(); ++k) b.values[k] -= a.values[k];
  return periodic_h1_norm(b) / step;
}

// ---------------------------------------------------------------------------

CellCorrectorSet CellCorrectorSet::build(const CoefficientField& field, const CellOptions& opts) {
  check_resolution(opts.n);
  if (opts.n_y < 1) throw InputError("n_y must be positive");
  CellCorrectorSet set;
  set.coefficient = field.name;
  set.params = field.params;
  set.dim = field.dim;
  set.n = opts.n;
  set.n_y = opts.n_y;
  set.y_samples = y_sample_points(field.dim, opts.n_y);
  const std::size_t ns = set.y_samples.size();
  const int d = field.dim;
  set.M.resize(ns);
  set.p.resize(ns);
  set.a_hat = AHatTable{d, opts.n_y, std::vector<Mat>(ns)};
  std::vector<int> iters(ns, 0);
  std::vector<double> resid(ns, 0.0);

  const Grid zg = set.z_grid();
  ExceptionSlot errors;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ss = 0; ss < static_cast<std::ptrdiff_t>(ns); ++ss) {
    errors.run([&] {
      const auto s = static_cast<std::size_t>(ss);
      const EllipticOperator op(zg, sample_z_coefficients(field, set.y_samples[s], zg));
      Mat a;
      std::array<EdgeField, kMaxDim> flux;
      for (int j = 0; j < d; ++j) {
        SolveStats st;
        set.M[s][j] = solve_cell(op, j, opts.solver, &st);
        iters[s] = std::max(iters[s], st.iterations);
        resid[s] = std::max(resid[s], st.relative_residual);
        flux[j] = flux_density(op, set.M[s][j], unit_vector(j));
        for (int i = 0; i < d; ++i) a(i, j) = flux[j].mean(i);
      }
      set.a_hat.samples[s] = a;
      for (int j = 0; j < d; ++j) set.p[s][j] = subtract_column(std::move(flux[j]), a, j);
    });
  }
  errors.rethrow();
  for (std::size_t s = 0; s < ns; ++s) {
    set.max_iterations = std::max(set.max_iterations, iters[s]);
    set.max_solver_residual = std::max(set.max_solver_residual, resid[s]);
  }

  const EllipticOperator yop = y_operator(set.a_hat, set.y_grid());
  for (int j = 0; j < d; ++j) {
    SolveStats st;
    set.N[j] = solve_cell(yop, j, opts.solver, &st);
    set.max_iterations = std::max(set.max_iterations, st.iterations);
    set.max_solver_residual = std::max(set.max_solver_residual, st.relative_residual);
  }
  std::array<EdgeField, kMaxDim> flux;
  for (int j = 0; j < d; ++j) {
    flux[j] = flux_density(yop, set.N[j], unit_vector(j));
    for (int i = 0; i < d; ++i) set.a0(i, j) = flux[j].mean(i);
  }
  for (int j = 0; j < d; ++j) {
    set.g[j] = subtract_column(std::move(flux[j]), set.a0, j);
    set.G[j] = solve_potential(set.g[j], SolverOptions{1e-12}, operator_norm(set.a0, set.dim));
  }
  set.finalize();
  return set;
}

void CellCorrectorSet::finalize() {
  for (int j = 0; j < dim; ++j) {
    const auto grad = nodal_gradient(N[j]);
    for (int a = 0; a < dim; ++a) grad_N_[j][a] = grad[a];
  }
  p_cache_ = std::make_shared<PCache>();
  p_cache_->slots.resize(y_samples.size());
}

const PotentialResult& CellCorrectorSet::P(std::size_t sample, int j) const {
  check_axis(j, dim);
  if (sample >= y_samples.size()) throw InputError("y-sample index out of range");
  std::lock_guard<std::mutex> lock(p_cache_->mutex);
  auto& slot = p_cache_->slots[sample][static_cast<std::size_t>(j)];
  if (!slot) {
    if (p.empty()) throw InputError("flux vectors p were not stored with this cell set");
    slot = std::make_unique<PotentialResult>(
        solve_potential(p[sample][j], SolverOptions{1e-12}, operator_norm(a_hat.samples[sample], dim)));
  }
  return *slot;
}

namespace {

double interpolate_nodal(const std::vector<double>& values, int dim, int n, const Vec& x) {
  const auto st = PeriodicLattice{dim, n, -0.5, 1.0 / n, 0.0}.stencil(x);
  double s = 0.0;
  for (int c = 0; c < st.size; ++c) s += st.weight[c] * values[st.index[c]];
  return s;
}

}  // namespace

double CellCorrectorSet::N_value(int j, const Vec& y) const {
  return interpolate_nodal(N[j].values, dim, n, y);
}

double CellCorrectorSet::N_gradient(int j, int axis, const Vec& y) const {
  return interpolate_nodal(grad_N_[j][axis], dim, n, y);
}

double CellCorrectorSet::M_value(int j, const Vec& y, const Vec& z) const {
  const auto sy = y_sample_lattice(dim, n_y).stencil(y);
  const auto sz = PeriodicLattice{dim, n, -0.5, 1.0 / n, 0.0}.stencil(z);
  double s = 0.0;
  for (int a = 0; a < sy.size; ++a) {
    const auto& m = M[sy.index[a]][j].values;
    double inner = 0.0;
    for (int b = 0; b < sz.size; ++b) inner += sz.weight[b] * m[sz.index[b]];
    s += sy.weight[a] * inner;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Cache: <key>.json holds metadata and the small matrices, <key>.bin the
// fields as raw doubles in a fixed order.

std::string CellCorrectorSet::cache_key(const CoefficientField& field, const CellOptions& opts) {
  std::ostringstream os;
  os << std::setprecision(17) << field.name << '|' << field.dim << '|' << opts.n << '|' << opts.n_y;
  for (const auto& [k, v] : field.params) os << '|' << k << '=' << v;
  std::ostringstream key;
  key << field.name << "_d" << field.dim << "_n" << opts.n << "_ny" << opts.n_y << '_' << std::hex
      << std::setw(16) << std::setfill('0') << fnv1a(os.str());
  return key.str();
}

namespace {

nlohmann::json mat_json(const Mat& a) { return std::vector<double>(a.m.begin(), a.m.end()); }
Mat json_mat(const nlohmann::json& j) {
  Mat a;
  const auto v = j.get<std::vector<double>>();
  for (std::size_t i = 0; i < a.m.size() && i < v.size(); ++i) a.m[i] = v[i];
  return a;
}

void write_block(std::ofstream& out, const std::vector<double>& v) {
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}
void read_block(std::ifstream& in, std::vector<double>& v, std::size_t count) {
  v.resize(count);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw Error("truncated cell cache", "cell");
}

}  // namespace

void CellCorrectorSet::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  CoefficientField probe;
  probe.name = coefficient;
  probe.dim = dim;
  probe.params = params;
  const std::string key = cache_key(probe, CellOptions{n, n_y, {}});

  nlohmann::json meta;
  meta["coefficient"] = coefficient;
  meta["params"] = params;
  meta["dim"] = dim;
  meta["n"] = n;
  meta["n_y"] = n_y;
  meta["a0"] = mat_json(a0);
  meta["a_hat"] = nlohmann::json::array();
  for (const Mat& a : a_hat.samples) meta["a_hat"].push_back(mat_json(a));
  meta["max_iterations"] = max_iterations;
  meta["max_solver_residual"] = max_solver_residual;

  // write under temporary names, then rename into place
  const auto tmp_bin = dir / (key + ".bin.tmp");
  const auto tmp_json = dir / (key + ".json.tmp");
  {
    std::ofstream out(tmp_bin, std::ios::binary);
    for (const auto& ms : M)
      for (int j = 0; j < dim; ++j) write_block(out, ms[j].values);
    for (const auto& ps : p)
      for (int j = 0; j < dim; ++j)
        for (int i = 0; i < dim; ++i) write_block(out, ps[j].comp[i]);
    for (int j = 0; j < dim; ++j) write_block(out, N[j].values);
    for (int j = 0; j < dim; ++j)
      for (int i = 0; i < dim; ++i) write_block(out, g[j].comp[i]);
    if (!out) throw Error("cannot write cell cache " + tmp_bin.string(), "cell");
  }
  {
    std::ofstream out(tmp_json);
    out << meta.dump(1) << '\n';
    if (!out) throw Error("cannot write cell cache " + tmp_json.string(), "cell");
  }
  std::filesystem::rename(tmp_bin, dir / (key + ".bin"));
  std::filesystem::rename(tmp_json, dir / (key + ".json"));
}

bool CellCorrectorSet::load(const std::filesystem::path& dir, const std::string& key,
                            CellCorrectorSet& out) {
  const auto json_path = dir / (key + ".json");
  const auto bin_path = dir / (key + ".bin");
  if (!std::filesystem::exists(json_path) || !std::filesystem::exists(bin_path)) return false;
  nlohmann::json meta;
  {
    std::ifstream in(json_path);
    meta = nlohmann::json::parse(in);
  }
  CellCorrectorSet set;
  set.coefficient = meta.at("coefficient").get<std::string>();
  set.params = meta.at("params").get<Params>();
  set.dim = meta.at("dim").get<int>();
  set.n = meta.at("n").get<int>();
  set.n_y = meta.at("n_y").get<int>();
  set.a0 = json_mat(meta.at("a0"));
  set.max_iterations = meta.value("max_iterations", 0);
  set.max_solver_residual = meta.value("max_solver_residual", 0.0);
  set.y_samples = y_sample_points(set.dim, set.n_y);
  const std::size_t ns = set.y_samples.size();
  set.a_hat = AHatTable{set.dim, set.n_y, {}};
  for (const auto& a : meta.at("a_hat")) set.a_hat.samples.push_back(json_mat(a));
  if (set.a_hat.samples.size() != ns) throw Error("cell cache has the wrong sample count", "cell");

  const Grid zg = set.z_grid();
  const Grid yg = set.y_grid();
  const std::size_t nn = zg.num_nodes();
  std::ifstream in(bin_path, std::ios::binary);
  set.M.resize(ns);
  set.p.resize(ns);
  for (auto& ms : set.M)
    for (int j = 0; j < set.dim; ++j) {
      ms[j] = GridField(zg);
      read_block(in, ms[j].values, nn);
    }
  for (auto& ps : set.p)
    for (int j = 0; j < set.dim; ++j) {
      ps[j] = EdgeField(zg);
      for (int i = 0; i < set.dim; ++i) read_block(in, ps[j].comp[i], nn);
    }
  for (int j = 0; j < set.dim; ++j) {
    set.N[j] = GridField(yg);
    read_block(in, set.N[j].values, yg.num_nodes());
  }
  for (int j = 0; j < set.dim; ++j) {
    set.g[j] = EdgeField(yg);
    for (int i = 0; i < set.dim; ++i) read_block(in, set.g[j].comp[i], yg.num_nodes());
    set.G[j] = solve_potential(set.g[j], SolverOptions{1e-12}, operator_norm(set.a0, set.dim));
  }
  set.finalize();
  out = std::move(set);
  return true;
}

CellCorrectorSet cached_cell_set(const CoefficientField& field, const CellOptions& opts,
                                 const std::filesystem::path& cache_dir) {
  CellCorrectorSet set;
  if (CellCorrectorSet::load(cache_dir, CellCorrectorSet::cache_key(field, opts), set)) return set;
  set = CellCorrectorSet::build(field, opts);
  set.save(cache_dir);
  return set;
}

}  // namespace homog
