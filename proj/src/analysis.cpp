#include "homog/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "homog/kernels.hpp"

namespace homog {

namespace {

// Mean of |g_c|^2 over the corners of element e (vertex-rule gradients).
double corner_grad2(const GridField& u, std::size_t e) {
  const Grid& g = u.grid;
  const double h = g.h();
  const auto& v = u.values;
  if (g.dim == 1) {
    const double d = (v[g.element_node(e, 1)] - v[g.element_node(e, 0)]) / h;
    return d * d;
  }
  double s = 0.0;
  for (int c = 0; c < 2; ++c) {
    const double d0 = (v[g.element_node(e, 1, c)] - v[g.element_node(e, 0, c)]) / h;
    const double d1 = (v[g.element_node(e, c, 1)] - v[g.element_node(e, c, 0)]) / h;
    s += 0.5 * (d0 * d0 + d1 * d1);
  }
  return s;
}

double corner_value2(const GridField& u, std::size_t e) {
  const Grid& g = u.grid;
  double s = 0.0;
  const int corners = g.dim == 1 ? 2 : 4;
  for (int c = 0; c < corners; ++c) {
    const double x = u.values[g.element_node(e, c & 1, (c >> 1) & 1)];
    s += x * x;
  }
  return s / corners;
}

DomainMesh mesh_of(const GridField& u) { return DomainMesh{u.grid}; }

void check_width(const GridField& u, double width) {
  if (width < u.grid.h() * (1.0 - 1e-12)) throw InputError("boundary-layer width is below the mesh size");
}

EllipticOperator laplacian(const Grid& g) {
  return EllipticOperator(g, std::vector<Mat>(g.num_elements(), Mat::identity(g.dim)));
}

}  // namespace

double l2_norm(const GridField& u) {
  double s = 0.0;
  for (std::size_t k = 0; k < u.values.size(); ++k) s += u.grid.node_weight(k) * u.values[k] * u.values[k];
  return std::sqrt(s);
}

double h1_seminorm(const GridField& u) {
  const Grid& g = u.grid;
  const double h = g.h();
  double s = 0.0;
  for (int i = 0; i < g.dim; ++i)
    for (std::size_t k = 0; k < g.num_nodes(); ++k) {
      const long next = g.neighbour(k, i, +1);
      if (next < 0 || !g.edge_valid(k, i)) continue;
      const double d = (u.values[static_cast<std::size_t>(next)] - u.values[k]) / h;
      s += g.edge_volume(k, i) * d * d;
    }
  return std::sqrt(s);
}

double h1_norm(const GridField& u) { return std::hypot(l2_norm(u), h1_seminorm(u)); }

double boundary_layer_l2(const GridField& u, double width) {
  check_width(u, width);
  const auto frac = mesh_of(u).layer_fraction(width);
  const double vol = u.grid.element_volume();
  double s = 0.0;
  for (std::size_t e = 0; e < frac.size(); ++e)
    if (frac[e] > 0.0) s += frac[e] * vol * corner_value2(u, e);
  return std::sqrt(s);
}

double boundary_layer_grad2(const GridField& u, double width) {
  check_width(u, width);
  const auto frac = mesh_of(u).layer_fraction(width);
  const double vol = u.grid.element_volume();
  double s = 0.0;
  for (std::size_t e = 0; e < frac.size(); ++e)
    if (frac[e] > 0.0) s += frac[e] * vol * corner_grad2(u, e);
  return s;
}

double edge_l2_norm(const EdgeField& v) {
  double s = 0.0;
  for (int i = 0; i < v.grid.dim; ++i)
    for (std::size_t k = 0; k < v.grid.num_nodes(); ++k)
      s += v.grid.edge_volume(k, i) * v.comp[i][k] * v.comp[i][k];
  return std::sqrt(s);
}

TraceCheck trace_check(const GridField& u, double eps) {
  TraceCheck t;
  const double grad = h1_seminorm(u);
  const double l2 = l2_norm(u);
  if (!(grad > 0.0)) {
    t.degenerate = true;
    return t;
  }
  const double layer = boundary_layer_l2(u, eps);
  t.ratio = layer * layer / (eps * l2 * grad);
  return t;
}

double residual_dual_norm(const EdgeField& r, const SolverOptions& opts) {
  const Grid& g = r.grid;
  const std::size_t nn = g.num_nodes();
  std::vector<double> moments(static_cast<std::size_t>(g.dim) * nn, 0.0);
  for (int i = 0; i < g.dim; ++i)
    for (std::size_t k = 0; k < nn; ++k) moments[static_cast<std::size_t>(i) * nn + k] = g.edge_volume(k, i) * r.comp[i][k];
  std::vector<double> load(nn);
  kernels::moment_divergence(g, moments, load);
  const EllipticOperator lap = laplacian(g);
  const auto w = lap.solve(load, opts);
  return std::sqrt(std::max(0.0, lap.form(w, w)));
}

double boundary_layer_check(const GridField& u_eps, double eps, double delta, double f_norm) {
  if (!(f_norm > 0.0)) return 0.0;
  return boundary_layer_grad2(u_eps, eps) / (tau_of(eps, delta) * f_norm * f_norm);
}

DualityCheck duality_identity_check(const CoefficientField& field, double eps, double delta,
                                    const Approximation& approx, const GridField& u_eps, const Mat& a0,
                                    const SolverOptions& opts, CoefficientSampling sampling) {
  const Grid& g = u_eps.grid;
  GridField w(g);
  for (std::size_t k = 0; k < g.num_nodes(); ++k) w.values[k] = approx.v_hat.values[k] - u_eps.values[k];
  GridField big_phi = w;
  big_phi.remove_mean();
  const DomainSolution adj = solve_adjoint(field, eps, delta, big_phi, opts, sampling);
  const GridField& phi = adj.u;

  DualityCheck c;
  for (std::size_t k = 0; k < g.num_nodes(); ++k) c.lhs += g.node_weight(k) * big_phi.values[k] * w.values[k];
  const EdgeField r = residual_field(field, eps, delta, approx, a0, sampling);
  const double h = g.h();
  for (int i = 0; i < g.dim; ++i)
    for (std::size_t k = 0; k < g.num_nodes(); ++k) {
      const long next = g.neighbour(k, i, +1);
      if (next < 0) continue;
      c.rhs += g.edge_volume(k, i) * r.comp[i][k] * (phi.values[static_cast<std::size_t>(next)] - phi.values[k]) / h;
    }
  c.phi_norm = l2_norm(big_phi);
  c.grad_phi_norm = h1_seminorm(phi);
  const double scale = c.phi_norm * c.grad_phi_norm;
  c.discrepancy = scale > 0.0 ? std::abs(c.lhs - c.rhs) / scale : std::abs(c.lhs - c.rhs);
  return c;
}

double poincare_constant(const DomainMesh& mesh, int iterations) {
  const Grid& g = mesh.grid;
  const EllipticOperator lap = laplacian(g);
  GridField x(g);
  // deterministic start with components along every low mode
  for (std::size_t k = 0; k < g.num_nodes(); ++k) {
    const Vec p = g.node_point(k);
    x.values[k] = p[0] + 0.37 * p[1] + 0.1 * p[0] * p[0];
  }
  x.remove_mean();
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const auto b = load_vector(x);
    GridField y(g, lap.solve(b, SolverOptions{1e-12}));
    const double mass = l2_norm(y);
    const double next = lap.form(y.values, y.values) / (mass * mass);
    for (double& v : y.values) v /= mass;
    x = std::move(y);
    const bool done = it > 0 && std::abs(next - lambda) <= 1e-12 * next;
    lambda = next;
    if (done) break;
  }
  return 1.0 / lambda;
}

RateFit fit_rate(std::span<const double> x, std::span<const double> y, double noise_floor) {
  if (x.size() != y.size()) throw InputError("fit columns differ in length");
  const std::size_t n = x.size();
  if (n < 3) throw InputError("a rate fit needs at least three records");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0)) throw InputError("fit abscissae must be positive");
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(x[i] - x[j]) <= 1e-14 * std::max(x[i], x[j])) throw InputError("identical abscissae in rate fit");
  }
  RateFit f;
  f.points = n;
  f.noise_floor = std::all_of(y.begin(), y.end(), [&](double v) { return v <= noise_floor; });
  std::vector<double> lx(n), ly(n);
  const double tiny = std::numeric_limits<double>::min();
  for (std::size_t i = 0; i < n; ++i) {
    lx[i] = std::log(x[i]);
    ly[i] = std::log(std::max(y[i], tiny));
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - f.intercept - f.slope * lx[i];
    sse += r * r;
  }
  const double dof = static_cast<double>(n - 2);
  const boost::math::students_t t(dof);
  f.half_width = boost::math::quantile(boost::math::complement(t, 0.025)) * std::sqrt(sse / dof / sxx);
  return f;
}

ConvergenceReport fit_rates(const std::vector<ErrorRecord>& records, const std::string& abscissa) {
  if (abscissa != "tau" && abscissa != "epsilon") throw InputError("abscissa must be tau or epsilon");
  ConvergenceReport rep;
  rep.records = records;
  std::vector<double> x;
  double f_max = 0.0;
  for (const auto& r : records) {
    x.push_back(abscissa == "tau" ? r.tau : r.epsilon);
    f_max = std::max(f_max, r.f_norm);
  }
  // errors below the solver tolerance carry no rate information
  const double floor = f_max > 0.0 ? 1e-9 * f_max : 1e-13;
  auto column = [&](const char* name, double ErrorRecord::*member) {
    std::vector<double> y;
    for (const auto& r : records) y.push_back(r.*member);
    RateFit f = fit_rate(x, y, floor);
    f.column = name;
    f.abscissa = abscissa;
    rep.fits.push_back(f);
  };
  column("l2_error", &ErrorRecord::l2_error);
  column("h1_error", &ErrorRecord::h1_error);
  column("residual_dual_norm", &ErrorRecord::residual_dual_norm);
  return rep;
}

}  // namespace homog
