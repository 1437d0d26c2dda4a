#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "homog/analysis.hpp"

using namespace homog;

namespace {

GridField sampled(const DomainMesh& mesh, const std::function<double(const Vec&)>& f) {
  GridField out(mesh.grid);
  for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = f(mesh.grid.node_point(k));
  return out;
}

// Edge differences of a nodal field, as a staggered density.
EdgeField edge_gradient(const GridField& u) {
  const Grid& g = u.grid;
  EdgeField r(g);
  for (int i = 0; i < g.dim; ++i)
    for (std::size_t k = 0; k < g.num_nodes(); ++k) {
      const long next = g.neighbour(k, i, +1);
      if (next >= 0) r.comp[i][k] = (u.values[static_cast<std::size_t>(next)] - u.values[k]) / g.h();
    }
  return r;
}

std::vector<ErrorRecord> synthetic(const std::function<double(double)>& err) {
  std::vector<ErrorRecord> out;
  for (double t : {0.125, 0.0625, 0.03125, 0.015625}) {
    ErrorRecord r;
    r.epsilon = r.tau = t;
    r.delta = t * t;
    r.f_norm = 1.0;
    r.l2_error = err(t);
    r.h1_error = std::sqrt(err(t));
    r.residual_dual_norm = err(t);
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_CASE("norms of simple fields") {
  const auto mesh = DomainMesh::make(2, 32);
  CHECK(l2_norm(GridField(mesh.grid, 1.0)) == doctest::Approx(1.0));
  const GridField s = sampled(mesh, [](const Vec& x) { return std::sin(2 * kPi * x[0]); });
  CHECK(l2_norm(s) * l2_norm(s) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(h1_seminorm(GridField(mesh.grid, 4.0)) == 0.0);
  const GridField lin = sampled(mesh, [](const Vec& x) { return 3.0 * x[1]; });
  CHECK(h1_seminorm(lin) == doctest::Approx(3.0));
  CHECK(h1_norm(lin) == doctest::Approx(std::hypot(l2_norm(lin), 3.0)));
}

TEST_CASE("boundary layer functionals") {
  const auto mesh = DomainMesh::make(2, 40);
  const GridField one(mesh.grid, 1.0);
  for (double eps : {0.125, 0.1, 0.05}) {
    const double l = boundary_layer_l2(one, eps);
    CHECK(l * l == doctest::Approx(1.0 - (1.0 - 2 * eps) * (1.0 - 2 * eps)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(boundary_layer_l2(one, 0.01), InputError);
  const GridField s = sampled(mesh, [](const Vec& x) { return std::cos(3 * x[0]) + x[1] * x[1]; });
  double prev = 0.0;
  for (double w : {0.025, 0.05, 0.08, 0.2, 0.5}) {
    const double v = boundary_layer_l2(s, w);
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(prev == doctest::Approx(l2_norm(s)).epsilon(1e-3));
  const GridField lin = sampled(mesh, [](const Vec& x) { return 2.0 * x[0]; });
  CHECK(boundary_layer_grad2(lin, 0.1) == doctest::Approx(4.0 * 0.36).epsilon(1e-12));
}

TEST_CASE("trace inequality ratio") {
  // phi = x1: |phi|^2 over the frame is 1/3 - (1 - 2e)((1-e)^3 - e^3)/3, |phi| = 1/sqrt3, |grad phi| = 1
  const auto mesh = DomainMesh::make(2, 256);
  const GridField x1 = sampled(mesh, [](const Vec& x) { return x[0]; });
  const double e = 0.125;
  const double frame = 1.0 / 3 - (1 - 2 * e) * (std::pow(1 - e, 3) - std::pow(e, 3)) / 3;
  const TraceCheck t = trace_check(x1, e);
  CHECK_FALSE(t.degenerate);
  CHECK(t.ratio == doctest::Approx(frame / (e / std::sqrt(3.0))).epsilon(1e-3));
  GridField twice = x1;
  for (double& v : twice.values) v *= 2.0;
  CHECK(trace_check(twice, e).ratio == doctest::Approx(t.ratio).epsilon(1e-14));
  CHECK(trace_check(GridField(mesh.grid, 1.0), e).degenerate);

  const GridField s = sampled(mesh, [](const Vec& x) { return std::sin(2 * kPi * x[0]); });
  std::vector<double> ratios;
  for (double eps : {0.125, 0.0625, 0.03125}) ratios.push_back(trace_check(s, eps).ratio);
  CHECK(*std::max_element(ratios.begin(), ratios.end()) <= 2.0 * *std::min_element(ratios.begin(), ratios.end()));
}

TEST_CASE("residual dual norm") {
  const auto mesh = DomainMesh::make(2, 32);
  CHECK(residual_dual_norm(EdgeField(mesh.grid)) == 0.0);
  const GridField chi = sampled(mesh, [](const Vec& x) { return std::cos(kPi * x[0]) * std::cos(2 * kPi * x[1]) + x[0]; });
  CHECK(residual_dual_norm(edge_gradient(chi)) == doctest::Approx(h1_seminorm(chi)).epsilon(1e-9));

  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 5; ++trial) {
    EdgeField r(mesh.grid);
    for (int i = 0; i < 2; ++i)
      for (std::size_t k = 0; k < mesh.grid.num_nodes(); ++k)
        if (mesh.grid.neighbour(k, i, +1) >= 0) r.comp[i][k] = n01(rng);
    CHECK(residual_dual_norm(r) <= edge_l2_norm(r) * (1.0 + 1e-10));
  }
}

TEST_CASE("boundary layer ratio with zero data") {
  const auto mesh = DomainMesh::make(1, 64);
  CHECK(boundary_layer_check(GridField(mesh.grid), 0.125, 1.0 / 64, 0.0) == 0.0);
}

TEST_CASE("duality identity holds for discrete solutions") {
  for (int dim : {1, 2}) {
    const auto field = make_coefficient(dim == 1 ? "trig_product" : "skew_trig", dim);
    const double eps = dim == 1 ? 0.125 : 0.5, delta = dim == 1 ? 1.0 / 64 : 0.25;
    const auto cells = CellCorrectorSet::build(field, CellOptions{32, dim == 1 ? 32 : 4, {}});
    const auto mesh = DomainMesh::make(dim, dim == 1 ? 512 : 32);
    const GridField f = Forcing::parse("1", dim).sample(mesh);
    const SolverOptions tight{1e-12};
    const GridField u0 = solve_homogenized(cells.a0, f, tight).solution.u;
    const GridField ue = solve_fine(field, eps, delta, f, tight).u;
    const Approximation a = first_approx_smoothed(u0, cells, eps, delta);
    const DualityCheck d = duality_identity_check(field, eps, delta, a, ue, cells.a0, tight);
    CHECK(d.phi_norm > 0.0);
    CHECK(d.discrepancy < 1e-8);
  }
  const auto c = make_coefficient("constant", 1, {{"c", 2.0}});
  const auto cells = CellCorrectorSet::build(c, CellOptions{8, 4, {}});
  const auto mesh = DomainMesh::make(1, 64);
  const GridField f = Forcing::parse("1", 1).sample(mesh);
  const GridField u0 = solve_homogenized(cells.a0, f, {1e-12}).solution.u;
  const Approximation a = first_approx_smoothed(u0, cells, 0.25, 1.0 / 16);
  const DualityCheck d = duality_identity_check(c, 0.25, 1.0 / 16, a, solve_fine(c, 0.25, 1.0 / 16, f, {1e-12}).u, cells.a0);
  CHECK(std::abs(d.lhs) < 1e-20);
  CHECK(std::abs(d.rhs) < 1e-12);
}

TEST_CASE("rate fits") {
  const auto lin = fit_rates(synthetic([](double t) { return t; }));
  CHECK(lin.fits[0].slope == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lin.fits[1].slope == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(lin.fits[0].half_width) < 1e-10);

  const auto scaled = fit_rates(synthetic([](double t) { return 37.0 * t * (1.0 + 0.2 * std::sin(40 * t)); }));
  const auto unscaled = fit_rates(synthetic([](double t) { return t * (1.0 + 0.2 * std::sin(40 * t)); }));
  CHECK(scaled.fits[0].slope == doctest::Approx(unscaled.fits[0].slope).epsilon(1e-12));
  CHECK(scaled.fits[0].half_width > 0.0);

  auto recs = synthetic([](double t) { return t * t; });
  std::reverse(recs.begin(), recs.end());
  CHECK(fit_rates(recs).fits[0].slope == doctest::Approx(2.0));

  recs[1].tau = recs[0].tau;
  CHECK_THROWS_AS(fit_rates(recs), InputError);
  recs.resize(2);
  CHECK_THROWS_AS(fit_rates(recs), InputError);

  const auto floor = fit_rates(synthetic([](double t) { return 1e-12 * t; }));
  CHECK(floor.fits[0].noise_floor);
  CHECK_FALSE(lin.fits[0].noise_floor);
}
