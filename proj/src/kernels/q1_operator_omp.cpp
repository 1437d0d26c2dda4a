#include <algorithm>
#include <array>
#include <vector>

#include "homog/kernels.hpp"

namespace homog::kernels {

namespace {

constexpr std::size_t kBlock = 2048;
// Below this many entries a parallel region costs more than it saves.
constexpr std::size_t kParallelMin = 1 << 15;

// Row-wise gather for 2D grids: each edge sums the vertex-rule contributions
// of the (at most two) elements sharing it.
void flux_moments_2d(const Grid& g, std::span<const Mat> coef, const double* u, const Vec& bg, double* m0,
                     double* m1) {
  const int p = g.nodes_per_axis();
  const int n = g.n;
  const bool per = g.periodic;
  const double inv_h = 1.0 / g.h();
  const double w = 0.25 * g.h() * g.h();
  const auto next = [&](int i) { return per && i + 1 == n ? 0 : i + 1; };
  const auto prev = [&](int i) { return per && i == 0 ? n - 1 : i - 1; };
#pragma omp parallel for schedule(static) if(g.num_nodes() > kParallelMin)
  for (int i1 = 0; i1 < p; ++i1) {
    const double* row = u + static_cast<std::ptrdiff_t>(i1) * p;
    const bool has_up = per || i1 < n, has_down = per || i1 > 0;
    const double* up = has_up ? u + static_cast<std::ptrdiff_t>(next(i1)) * p : nullptr;
    const double* down = has_down ? u + static_cast<std::ptrdiff_t>(prev(i1)) * p : nullptr;
    for (int i0 = 0; i0 < p; ++i0) {
      const std::size_t k = static_cast<std::size_t>(i1) * p + i0;
      const bool has_right = per || i0 < n, has_left = per || i0 > 0;

      double acc = 0.0;
      if (has_right) {
        const int j0 = next(i0);
        const double along = 2.0 * ((row[j0] - row[i0]) * inv_h + bg[0]);
        if (has_down) {
          const Mat& a = coef[g.element_index(i0, prev(i1))];
          const double across = (row[i0] - down[i0] + row[j0] - down[j0]) * inv_h + 2.0 * bg[1];
          acc += a(0, 0) * along + a(0, 1) * across;
        }
        if (has_up) {
          const Mat& a = coef[g.element_index(i0, i1)];
          const double across = (up[i0] - row[i0] + up[j0] - row[j0]) * inv_h + 2.0 * bg[1];
          acc += a(0, 0) * along + a(0, 1) * across;
        }
      }
      m0[k] = w * acc;

      acc = 0.0;
      if (has_up) {
        const double along = 2.0 * ((up[i0] - row[i0]) * inv_h + bg[1]);
        if (has_left) {
          const int c = prev(i0);
          const Mat& a = coef[g.element_index(c, i1)];
          const double across = (row[i0] - row[c] + up[i0] - up[c]) * inv_h + 2.0 * bg[0];
          acc += a(1, 1) * along + a(1, 0) * across;
        }
        if (has_right) {
          const int c = next(i0);
          const Mat& a = coef[g.element_index(i0, i1)];
          const double across = (row[c] - row[i0] + up[c] - up[i0]) * inv_h + 2.0 * bg[0];
          acc += a(1, 1) * along + a(1, 0) * across;
        }
      }
      m1[k] = w * acc;
    }
  }
}

}  // namespace

void flux_moments(const Grid& grid, std::span<const Mat> coef, std::span<const double> u,
                  const Vec& background, std::span<double> moments) {
  const std::size_t nn = grid.num_nodes();
  if (grid.dim == 2) {
    flux_moments_2d(grid, coef, u.data(), background, moments.data(), moments.data() + nn);
    return;
  }
  const int n = grid.n;
  const double h = grid.h();
#pragma omp parallel for schedule(static) if(nn > kParallelMin)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(nn); ++k) {
    const auto kk = static_cast<std::size_t>(k);
    if (!grid.periodic && k == n) {
      moments[kk] = 0.0;
      continue;
    }
    const std::size_t nxt = grid.periodic && k + 1 == n ? 0 : kk + 1;
    moments[kk] = h * coef[kk](0, 0) * ((u[nxt] - u[kk]) / h + background[0]);
  }
}

void moment_divergence(const Grid& grid, std::span<const double> moments, std::span<double> out) {
  const int p = grid.nodes_per_axis();
  const int n = grid.n;
  const bool per = grid.periodic;
  const double inv_h = 1.0 / grid.h();
  const double* w0 = moments.data();
  if (grid.dim == 1) {
#pragma omp parallel for schedule(static) if(grid.num_nodes() > kParallelMin)
    for (int k = 0; k < p; ++k) {
      double acc = -w0[k];
      if (per || k > 0) acc += w0[per && k == 0 ? n - 1 : k - 1];
      out[static_cast<std::size_t>(k)] = acc * inv_h;
    }
    return;
  }
  const double* w1 = w0 + grid.num_nodes();
#pragma omp parallel for schedule(static) if(grid.num_nodes() > kParallelMin)
  for (int i1 = 0; i1 < p; ++i1) {
    const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(i1) * p;
    const bool has_down = per || i1 > 0;
    const std::ptrdiff_t down = static_cast<std::ptrdiff_t>(per && i1 == 0 ? n - 1 : i1 - 1) * p;
    for (int i0 = 0; i0 < p; ++i0) {
      const std::ptrdiff_t k = base + i0;
      double acc = -w0[k] - w1[k];
      if (per || i0 > 0) acc += w0[base + (per && i0 == 0 ? n - 1 : i0 - 1)];
      if (has_down) acc += w1[down + i0];
      out[static_cast<std::size_t>(k)] = acc * inv_h;
    }
  }
}

void apply_operator(const Grid& grid, std::span<const Mat> coef, std::span<const double> u,
                    std::span<double> out, std::span<double> scratch) {
  static constexpr Vec kZero{};
  flux_moments(grid, coef, u, kZero, scratch);
  moment_divergence(grid, scratch, out);
}

std::vector<double> operator_diagonal(const Grid& grid, std::span<const Mat> coef) {
  // Scatter of the basis-function corner gradients; assembly-time only.
  std::vector<double> diag(grid.num_nodes(), 0.0);
  const double h = grid.h();
  const int corners = grid.dim == 1 ? 2 : 4;
  const double w = grid.element_volume() / corners;
  for (std::size_t e = 0; e < grid.num_elements(); ++e) {
    const Mat& a = coef[e];
    for (int c = 0; c < corners; ++c) {
      const int c0 = c & 1;
      const int c1 = (c >> 1) & 1;
      for (int v = 0; v < corners; ++v) {
        const int v0 = v & 1;
        const int v1 = (v >> 1) & 1;
        Vec g{};
        // axis-0 edge through corner c runs between offsets (0,c1) and (1,c1)
        if (v1 == c1) g[0] = (v0 == 1 ? 1.0 : -1.0) / h;
        if (grid.dim == 2 && v0 == c0) g[1] = (v1 == 1 ? 1.0 : -1.0) / h;
        diag[grid.element_node(e, v0, v1)] += w * dot(g, a * g);
      }
    }
  }
  return diag;
}

namespace {

// Fixed-size blocks summed in index order; the block partials are combined
// serially, so the result is independent of the thread count.
template <class Term>
double block_reduce(std::size_t size, Term term) {
  const std::size_t blocks = (size + kBlock - 1) / kBlock;
  constexpr std::size_t kInline = 256;
  std::array<double, kInline> small{};
  std::vector<double> large(blocks > kInline ? blocks : 0);
  double* partial = blocks > kInline ? large.data() : small.data();
#pragma omp parallel for schedule(static) if(size > kParallelMin)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
    const std::size_t hi = std::min(size, lo + kBlock);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    partial[b] = s;
  }
  double s = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) s += partial[b];
  return s;
}

}  // namespace

double sum(std::span<const double> a) {
  return block_reduce(a.size(), [&](std::size_t i) { return a[i]; });
}

double dot(std::span<const double> a, std::span<const double> b) {
  return block_reduce(a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

double weighted_dot(std::span<const double> w, std::span<const double> a, std::span<const double> b) {
  return block_reduce(a.size(), [&](std::size_t i) { return w[i] * a[i] * b[i]; });
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
#pragma omp parallel for schedule(static) if(x.size() > kParallelMin)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(x.size()); ++i)
    y[static_cast<std::size_t>(i)] += alpha * x[static_cast<std::size_t>(i)];
}

void xpby(std::span<const double> x, double beta, std::span<double> y) {
#pragma omp parallel for schedule(static) if(x.size() > kParallelMin)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(x.size()); ++i) {
    const auto ii = static_cast<std::size_t>(i);
    y[ii] = x[ii] + beta * y[ii];
  }
}

}  // namespace homog::kernels
