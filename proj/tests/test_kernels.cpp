#include <doctest.h>

#include <random>

#include "homog/coefficients.hpp"
#include "homog/kernels.hpp"
#include "homog/linsolve.hpp"

using namespace homog;

namespace {

std::vector<double> random_vector(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

std::vector<Mat> random_coefficients(const Grid& g, bool symmetric, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 2.0), off(-0.3, 0.3);
  std::vector<Mat> c(g.num_elements());
  for (Mat& a : c) {
    a = Mat::identity(g.dim);
    a(0, 0) = u(rng);
    if (g.dim == 2) {
      a(1, 1) = u(rng);
      a(0, 1) = off(rng);
      a(1, 0) = symmetric ? a(0, 1) : off(rng);
    }
  }
  return c;
}

}  // namespace

TEST_CASE("parallel operator matches the element-scatter reference") {
  for (const Grid g : {Grid::cell(1, 17), Grid::cell(2, 9), Grid::box(1, 13), Grid::box(2, 7, 2.0)}) {
    const auto coef = random_coefficients(g, false, 3);
    const auto u = random_vector(g.num_nodes(), 5);
    std::vector<double> a(g.num_nodes()), b(g.num_nodes()), scratch(2 * g.num_nodes());
    kernels::apply_operator(g, coef, u, a, scratch);
    kernels::serial::apply_operator_reference(g, coef, u, b);
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-12));

    const Vec bg{0.3, -0.7};
    std::vector<double> w1(2 * g.num_nodes()), w2(2 * g.num_nodes());
    kernels::flux_moments(g, coef, u, bg, w1);
    kernels::serial::flux_moments_reference(g, coef, u, bg, w2);
    for (std::size_t k = 0; k < w1.size(); ++k) CHECK(w1[k] == doctest::Approx(w2[k]).epsilon(1e-12));
  }
}

TEST_CASE("operator diagonal matches unit-vector probes") {
  const Grid g = Grid::box(2, 5);
  const auto coef = random_coefficients(g, true, 11);
  const auto diag = kernels::operator_diagonal(g, coef);
  std::vector<double> e(g.num_nodes(), 0.0), out(g.num_nodes());
  for (std::size_t k = 0; k < g.num_nodes(); ++k) {
    e.assign(g.num_nodes(), 0.0);
    e[k] = 1.0;
    kernels::serial::apply_operator_reference(g, coef, e, out);
    CHECK(diag[k] == doctest::Approx(out[k]).epsilon(1e-12));
  }
}

TEST_CASE("form is symmetric for symmetric coefficients and constants lie in the kernel") {
  const Grid g = Grid::box(2, 6);
  const EllipticOperator op(g, random_coefficients(g, true, 7));
  const auto u = random_vector(g.num_nodes(), 1), v = random_vector(g.num_nodes(), 2);
  CHECK(op.form(u, v) == doctest::Approx(op.form(v, u)).epsilon(1e-12));
  std::vector<double> one(g.num_nodes(), 1.0), out(g.num_nodes());
  op.apply(one, out);
  for (double x : out) CHECK(std::abs(x) < 1e-12);
}

TEST_CASE("deterministic reductions agree with the serial dot product") {
  const auto a = random_vector(10007, 3), b = random_vector(10007, 4);
  CHECK(kernels::dot(a, b) == doctest::Approx(kernels::serial::dot(a, b)).epsilon(1e-12));
}

TEST_CASE("Krylov and direct solvers reproduce a manufactured solution") {
  SUBCASE("1D flux sweep, bounded and periodic") {
    for (const Grid g : {Grid::box(1, 40), Grid::cell(1, 40)}) {
      const EllipticOperator op(g, random_coefficients(g, true, 9));
      GridField x(g, random_vector(g.num_nodes(), 8));
      x.remove_mean();
      std::vector<double> b(g.num_nodes());
      op.apply(x.values, b);
      const auto y = op.solve(b);
      for (std::size_t k = 0; k < y.size(); ++k) CHECK(y[k] == doctest::Approx(x.values[k]).epsilon(1e-9));
    }
  }
  SUBCASE("2D CG and BiCGStab") {
    for (bool sym : {true, false}) {
      const Grid g = Grid::box(2, 12);
      const EllipticOperator op(g, random_coefficients(g, sym, 21));
      CHECK(op.symmetric() == sym);
      GridField x(g, random_vector(g.num_nodes(), 8));
      x.remove_mean();
      std::vector<double> b(g.num_nodes());
      op.apply(x.values, b);
      SolveStats st;
      const auto y = op.solve(b, SolverOptions{1e-12}, &st);
      CHECK(st.converged);
      for (std::size_t k = 0; k < y.size(); ++k) CHECK(y[k] == doctest::Approx(x.values[k]).epsilon(1e-7));
    }
  }
}

TEST_CASE("non-convergence surfaces the residual history") {
  const Grid g = Grid::box(2, 16);
  const EllipticOperator op(g, std::vector<Mat>(g.num_elements(), Mat::identity(2)));
  auto b = random_vector(g.num_nodes(), 4);
  SolverOptions opts;
  opts.max_iter = 2;
  opts.method = SolverMethod::cg;
  try {
    (void)op.solve(b, opts);
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(e.stats().history.size() == 3);
    CHECK(std::string(e.stage()) == "solve");
  }
}
