#include "homog/corrector.hpp"

#include <boost/math/quadrature/gauss.hpp>

namespace homog {

namespace {

template <unsigned N>
CellRule rule_from_boost() {
  using boost::math::quadrature::gauss;
  const auto& x = gauss<double, N>::abscissa();
  const auto& w = gauss<double, N>::weights();
  CellRule r;
  // boost stores the nonnegative half; node 0 is the centre for odd N
  for (std::size_t i = 0; i < x.size(); ++i) {
    const bool centre = (N % 2 == 1) && i == 0;
    r.nodes.push_back(0.5 * x[i]);
    r.weights.push_back(0.5 * w[i]);
    if (!centre) {
      r.nodes.push_back(-0.5 * x[i]);
      r.weights.push_back(0.5 * w[i]);
    }
  }
  return r;
}

struct Gradient {
  int dim = 1;
  std::array<GridField, kMaxDim> comp;
  Vec at(const Vec& x) const {
    Vec g{};
    for (int a = 0; a < dim; ++a) g[a] = interpolate(comp[a], x);
    return g;
  }
};

Gradient gradient_of(const GridField& u) {
  Gradient g;
  g.dim = u.grid.dim;
  auto grad = nodal_gradient(u);
  for (int a = 0; a < std::min(g.dim, kMaxDim); ++a) g.comp[a] = GridField(u.grid, std::move(grad[a]));
  return g;
}

// Sigma points of the tensor rule on Z.
struct SigmaRule {
  std::vector<Vec> points;
  std::vector<double> weights;
};

SigmaRule sigma_rule(int dim, int order) {
  const CellRule r = cell_rule(order);
  SigmaRule s;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    if (dim == 1) {
      s.points.push_back({r.nodes[i], 0.0});
      s.weights.push_back(r.weights[i]);
      continue;
    }
    for (std::size_t k = 0; k < r.nodes.size(); ++k) {
      s.points.push_back({r.nodes[i], r.nodes[k]});
      s.weights.push_back(r.weights[i] * r.weights[k]);
    }
  }
  return s;
}

}  // namespace

CellRule cell_rule(int order) {
  switch (order) {
    case 1: return CellRule{{0.0}, {1.0}};
    case 2: return rule_from_boost<2>();
    case 3: return rule_from_boost<3>();
    case 4: return rule_from_boost<4>();
    case 5: return rule_from_boost<5>();
    case 6: return rule_from_boost<6>();
    case 7: return rule_from_boost<7>();
    case 8: return rule_from_boost<8>();
    case 9: return rule_from_boost<9>();
    case 10: return rule_from_boost<10>();
    case 20: return rule_from_boost<20>();
    default: throw ConfigError("quadrature order must be 1..10 or 20", "approx");
  }
}

GridField steklov_smooth(const std::function<double(const Vec&)>& phi, const DomainMesh& mesh,
                         double delta, int order) {
  const SigmaRule rule = sigma_rule(mesh.dim(), order);
  GridField out(mesh.grid);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t kk = 0; kk < static_cast<std::ptrdiff_t>(out.values.size()); ++kk) {
    const auto k = static_cast<std::size_t>(kk);
    const Vec x = mesh.grid.node_point(k);
    double s = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) s += rule.weights[q] * phi(x - delta * rule.points[q]);
    out.values[k] = s;
  }
  return out;
}

GridField steklov_smooth(const ExtendedField& phi, const DomainMesh& mesh, double delta, int order) {
  if (phi.pad * mesh.h() < delta / 2.0 - 1e-12) throw InputError("extension margin is smaller than delta / 2");
  return steklov_smooth([&](const Vec& x) { return phi.value(x); }, mesh, delta, order);
}

GridField first_approx_plain(const GridField& u0, const CellCorrectorSet& cells, double eps, double delta) {
  const Grid& g = u0.grid;
  const int d = g.dim;
  if (d != cells.dim) throw InputError("cell data and mesh dimensions differ");
  const Gradient grad = gradient_of(u0);
  GridField v(g);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t kk = 0; kk < static_cast<std::ptrdiff_t>(g.num_nodes()); ++kk) {
    const auto k = static_cast<std::size_t>(kk);
    const Vec x = g.node_point(k);
    const Vec y = (1.0 / eps) * x, z = (1.0 / delta) * x;
    Vec du{};
    for (int a = 0; a < d; ++a) du[a] = grad.comp[a].values[k];
    double n_term = 0.0, m_term = 0.0;
    for (int j = 0; j < d; ++j) {
      n_term += cells.N_value(j, y) * du[j];
      double zeta = du[j];
      for (int i = 0; i < d; ++i) zeta += cells.N_gradient(i, j, y) * du[i];
      m_term += cells.M_value(j, y, z) * zeta;
    }
    v.values[k] = u0.values[k] + eps * n_term + delta * m_term;
  }
  return v;
}

Approximation first_approx_smoothed(const GridField& u0, const CellCorrectorSet& cells, double eps,
                                    double delta, const SmoothingOptions& opts) {
  const Grid& g = u0.grid;
  const int d = g.dim;
  if (d != cells.dim) throw InputError("cell data and mesh dimensions differ");
  if (opts.order < 2) throw ConfigError("smoothing needs at least 2 points per axis", "approx");
  // one extra cell beyond delta / 2 keeps the centred gradient valid at x'
  const double margin = std::min(g.length / 2.0, delta / 2.0 + 2.0 * g.h());
  const ExtendedField ext = extend(u0, margin, opts.extension);
  const Gradient grad = gradient_of(ext.field);
  const SigmaRule rule = sigma_rule(d, opts.order);

  Approximation a;
  a.u0 = u0;
  a.K1 = GridField(g);
  a.K2 = GridField(g);
  a.eps = eps;
  a.delta = delta;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t kk = 0; kk < static_cast<std::ptrdiff_t>(g.num_nodes()); ++kk) {
    const auto k = static_cast<std::size_t>(kk);
    const Vec x = g.node_point(k);
    const Vec z = (1.0 / delta) * x;
    double k1 = 0.0, k2 = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Vec xs = x - delta * rule.points[q];
      const Vec ys = (1.0 / eps) * xs;
      const Vec du = grad.at(xs);
      double n_term = 0.0, m_term = 0.0;
      for (int j = 0; j < d; ++j) {
        n_term += cells.N_value(j, ys) * du[j];
        double zeta = du[j];
        for (int i = 0; i < d; ++i) zeta += cells.N_gradient(i, j, ys) * du[i];
        m_term += cells.M_value(j, ys, z) * zeta;
      }
      k1 += rule.weights[q] * n_term;
      k2 += rule.weights[q] * m_term;
    }
    a.K1.values[k] = k1;
    a.K2.values[k] = k2;
  }
  a.v_hat = GridField(g);
  for (std::size_t k = 0; k < g.num_nodes(); ++k)
    a.v_hat.values[k] = u0.values[k] + eps * a.K1.values[k] + delta * a.K2.values[k];
  return a;
}

EdgeField residual_field(const CoefficientField& field, double eps, double delta,
                         const Approximation& approx, const Mat& a0, CoefficientSampling sampling) {
  const Grid& g = approx.v_hat.grid;
  const EllipticOperator fine(g, sample_fine_coefficients(field, eps, delta, g, false, sampling));
  const EllipticOperator homog(g, std::vector<Mat>(g.num_elements(), a0));
  const auto w1 = fine.flux_moments(approx.v_hat.values);
  const auto w0 = homog.flux_moments(approx.u0.values);
  EdgeField r(g);
  const std::size_t nn = g.num_nodes();
  for (int i = 0; i < g.dim; ++i)
    for (std::size_t k = 0; k < nn; ++k) {
      const double vol = g.edge_volume(k, i);
      const std::size_t idx = static_cast<std::size_t>(i) * nn + k;
      r.comp[i][k] = vol > 0.0 ? (w1[idx] - w0[idx]) / vol : 0.0;
    }
  return r;
}

}  // namespace homog
