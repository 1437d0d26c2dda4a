#pragma once

// Data-parallel inner loops of the Q1 discretization.
//
// The bilinear form of every elliptic solve in the library is
//
//   B(u, v) = sum_e sum_{corners c of e} w (a_e g_c(u)) . g_c(v),   w = h^d / 2^d,
//
// with a_e the coefficient at the element midpoint and g_c(u) the vertex
// gradient at corner c: its i-th component is the difference quotient of u
// along the axis-i edge of e through c. Grouping corners by edge gives the
// flux moments W_i(E) = sum_{c on E} w (a_e g_c)_i, so that
// B(u, v) = sum_i sum_E W_i(E) D_i^+ v(E).
//
// The OpenMP kernels gather per edge and per node and never write shared
// data. The serial namespace holds an element-by-element scatter assembly of
// the same operator that the tests use as an independent reference.

#include <cstddef>
#include <span>
#include <vector>

#include "homog/grid.hpp"

namespace homog::kernels {

/// Flux moments of a Q1 field (plus a constant background gradient).
/// `moments` has dim * num_nodes entries, axis-major; invalid edges get 0.
void flux_moments(const Grid& grid, std::span<const Mat> coef, std::span<const double> u,
                  const Vec& background, std::span<double> moments);

/// out_k = sum_i (W_i(k - e_i) - W_i(k)) / h, the row of B(., phi_k).
void moment_divergence(const Grid& grid, std::span<const double> moments, std::span<double> out);

/// out = A u where (A u)_k = B(u, phi_k). `scratch` needs dim * num_nodes.
void apply_operator(const Grid& grid, std::span<const Mat> coef, std::span<const double> u,
                    std::span<double> out, std::span<double> scratch);

/// Diagonal of A (Jacobi preconditioner).
std::vector<double> operator_diagonal(const Grid& grid, std::span<const Mat> coef);

/// Evaluates f at every index in parallel: out[i] = f(i).
template <class F>
void parallel_map(std::size_t count, std::span<double> out, F&& f) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i)
    out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
}

/// Deterministic reductions: fixed-size blocks summed in index order, so the
/// result does not depend on the thread count.
double sum(std::span<const double> a);
double dot(std::span<const double> a, std::span<const double> b);
double weighted_dot(std::span<const double> w, std::span<const double> a, std::span<const double> b);
/// y += alpha x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
/// y = x + beta y
void xpby(std::span<const double> x, double beta, std::span<double> y);

namespace serial {

/// Element-scatter assembly of A u; reference for apply_operator.
void apply_operator_reference(const Grid& grid, std::span<const Mat> coef,
                              std::span<const double> u, std::span<double> out);

/// Corner-by-corner accumulation of the flux moments; reference for flux_moments.
void flux_moments_reference(const Grid& grid, std::span<const Mat> coef,
                            std::span<const double> u, const Vec& background,
                            std::span<double> moments);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace serial

}  // namespace homog::kernels
