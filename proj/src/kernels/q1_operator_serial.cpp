#include <algorithm>

#include "homog/kernels.hpp"

namespace homog::kernels::serial {

namespace {

// Vertex gradient of u at corner (c0, c1) of element e.
Vec corner_gradient(const Grid& g, std::size_t e, int c0, int c1, std::span<const double> u,
                    const Vec& bg) {
  const double h = g.h();
  Vec grad{};
  grad[0] = (u[g.element_node(e, 1, c1)] - u[g.element_node(e, 0, c1)]) / h + bg[0];
  if (g.dim == 2) grad[1] = (u[g.element_node(e, c0, 1)] - u[g.element_node(e, c0, 0)]) / h + bg[1];
  return grad;
}

}  // namespace

void apply_operator_reference(const Grid& grid, std::span<const Mat> coef,
                              std::span<const double> u, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const double h = grid.h();
  const int corners = grid.dim == 1 ? 2 : 4;
  const double w = grid.element_volume() / corners;
  const Vec zero{};
  for (std::size_t e = 0; e < grid.num_elements(); ++e) {
    for (int c = 0; c < corners; ++c) {
      const int c0 = c & 1;
      const int c1 = (c >> 1) & 1;
      const Vec q = coef[e] * corner_gradient(grid, e, c0, c1, u, zero);
      // basis gradients at this corner: +-1/h on the two edges through it
      out[grid.element_node(e, 1, c1)] += w * q[0] / h;
      out[grid.element_node(e, 0, c1)] -= w * q[0] / h;
      if (grid.dim == 2) {
        out[grid.element_node(e, c0, 1)] += w * q[1] / h;
        out[grid.element_node(e, c0, 0)] -= w * q[1] / h;
      }
    }
  }
}

void flux_moments_reference(const Grid& grid, std::span<const Mat> coef,
                            std::span<const double> u, const Vec& background,
                            std::span<double> moments) {
  std::fill(moments.begin(), moments.end(), 0.0);
  const std::size_t nn = grid.num_nodes();
  const int corners = grid.dim == 1 ? 2 : 4;
  const double w = grid.element_volume() / corners;
  for (std::size_t e = 0; e < grid.num_elements(); ++e) {
    for (int c = 0; c < corners; ++c) {
      const int c0 = c & 1;
      const int c1 = (c >> 1) & 1;
      const Vec q = coef[e] * corner_gradient(grid, e, c0, c1, u, background);
      moments[grid.element_node(e, 0, c1)] += w * q[0];
      if (grid.dim == 2) moments[nn + grid.element_node(e, c0, 0)] += w * q[1];
    }
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace homog::kernels::serial
