#pragma once

#include <cstddef>
#include <vector>

#include "homog/types.hpp"

namespace homog {

/// Uniform tensor grid of n elements per axis on [origin, origin + length]^d.
///
/// A periodic grid identifies opposite faces and stores n nodes per axis; a
/// bounded grid stores n + 1. Node and element multi-indices are flattened
/// with axis 0 fastest. Edges are addressed by (start node, axis): the
/// axis-i edge of node k joins k and k + e_i.
struct Grid {
  int dim = 1;
  int n = 4;
  bool periodic = true;
  double origin = -0.5;
  double length = 1.0;

  /// The periodicity cell [-1/2, 1/2]^d.
  static Grid cell(int dim, int n) { return Grid{dim, n, true, -0.5, 1.0}; }
  static Grid box(int dim, int m, double length = 1.0, double origin = 0.0) {
    return Grid{dim, m, false, origin, length};
  }

  double h() const { return length / n; }
  int nodes_per_axis() const { return periodic ? n : n + 1; }
  std::size_t num_nodes() const {
    const auto p = static_cast<std::size_t>(nodes_per_axis());
    return dim == 1 ? p : p * p;
  }
  std::size_t num_elements() const {
    const auto e = static_cast<std::size_t>(n);
    return dim == 1 ? e : e * e;
  }
  double element_volume() const { return dim == 1 ? h() : h() * h(); }
  double volume() const { return dim == 1 ? length : length * length; }

  std::array<int, 2> node_multi(std::size_t k) const {
    const auto p = static_cast<std::size_t>(nodes_per_axis());
    return {static_cast<int>(k % p), dim == 1 ? 0 : static_cast<int>(k / p)};
  }
  std::size_t node_index(int i0, int i1 = 0) const {
    return static_cast<std::size_t>(i0) +
           static_cast<std::size_t>(nodes_per_axis()) * static_cast<std::size_t>(i1);
  }
  std::array<int, 2> element_multi(std::size_t e) const {
    const auto ne = static_cast<std::size_t>(n);
    return {static_cast<int>(e % ne), dim == 1 ? 0 : static_cast<int>(e / ne)};
  }
  std::size_t element_index(int e0, int e1 = 0) const {
    return static_cast<std::size_t>(e0) + static_cast<std::size_t>(n) * static_cast<std::size_t>(e1);
  }

  /// Wraps a node coordinate index on periodic grids; identity otherwise.
  int wrap(int i) const {
    if (!periodic) return i;
    const int r = i % n;
    return r < 0 ? r + n : r;
  }
  /// Node of an element corner; offsets are 0 or 1 per axis.
  std::size_t element_node(std::size_t e, int a0, int a1 = 0) const {
    const auto em = element_multi(e);
    return node_index(wrap(em[0] + a0), dim == 1 ? 0 : wrap(em[1] + a1));
  }

  Vec node_point(std::size_t k) const {
    const auto km = node_multi(k);
    Vec x{};
    for (int a = 0; a < dim; ++a) x[a] = origin + km[a] * h();
    return x;
  }
  Vec element_midpoint(std::size_t e) const {
    const auto em = element_multi(e);
    Vec x{};
    for (int a = 0; a < dim; ++a) x[a] = origin + (em[a] + 0.5) * h();
    return x;
  }

  bool on_boundary(int index_along_axis) const {
    return !periodic && (index_along_axis == 0 || index_along_axis == n);
  }

  /// Trapezoidal (lumped) node weight; weights sum to volume().
  double node_weight(std::size_t k) const {
    double w = element_volume();
    if (periodic) return w;
    const auto km = node_multi(k);
    for (int a = 0; a < dim; ++a)
      if (on_boundary(km[a])) w *= 0.5;
    return w;
  }

  bool edge_valid(std::size_t k, int axis) const {
    if (periodic) return true;
    return node_multi(k)[axis] < n;
  }

  /// Sum of vertex-rule weights of the element corners lying on an edge.
  double edge_volume(std::size_t k, int axis) const {
    if (!edge_valid(k, axis)) return 0.0;
    double w = element_volume();
    if (periodic || dim == 1) return w;
    const auto km = node_multi(k);
    const int other = 1 - axis;
    if (on_boundary(km[other])) w *= 0.5;
    return w;
  }

  /// Neighbour node along an axis, or -1 past a bounded face.
  long neighbour(std::size_t k, int axis, int step) const {
    auto km = node_multi(k);
    int i = km[axis] + step;
    if (periodic) {
      i = wrap(i);
    } else if (i < 0 || i > n) {
      return -1;
    }
    km[axis] = i;
    return static_cast<long>(node_index(km[0], km[1]));
  }

  bool operator==(const Grid&) const = default;
};

/// Nodal scalar field.
struct GridField {
  Grid grid;
  std::vector<double> values;

  GridField() = default;
  explicit GridField(const Grid& g, double fill = 0.0) : grid(g), values(g.num_nodes(), fill) {}
  GridField(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {}

  /// Weighted (trapezoidal) integral over the grid.
  double integral() const;
  double mean() const { return integral() / grid.volume(); }
  /// Subtracts the weighted mean.
  void remove_mean();
};

/// Staggered vector field: component i is a density sampled at the
/// midpoints of the axis-i edges, indexed by the edge's start node.
struct EdgeField {
  Grid grid;
  std::array<std::vector<double>, kMaxDim> comp;

  EdgeField() = default;
  explicit EdgeField(const Grid& g) : grid(g) {
    for (int i = 0; i < g.dim; ++i) comp[i].assign(g.num_nodes(), 0.0);
  }
  /// Edge-volume-weighted average of one component.
  double mean(int i) const;
};

/// Skew-symmetric d x d matrix field. In 2D the single free entry
/// S_12 = -S_21 lives at element centres, indexed by element; the 1D
/// matrix is identically zero.
struct SkewField {
  Grid grid;
  std::vector<double> upper;

  SkewField() = default;
  explicit SkewField(const Grid& g) : grid(g) {
    if (g.dim == 2) upper.assign(g.num_elements(), 0.0);
  }
  double operator()(int i, int k, std::size_t e) const {
    if (i == k || grid.dim == 1) return 0.0;
    return i < k ? upper[e] : -upper[e];
  }
};

/// Centred periodic (or one-sided at a bounded face) nodal gradient.
std::array<std::vector<double>, kMaxDim> nodal_gradient(const GridField& f);

/// Periodic multilinear interpolation on a lattice of `count` points per
/// axis at origin + (k + shift) * spacing.
struct PeriodicLattice {
  int dim = 1;
  int count = 1;
  double origin = -0.5;
  double spacing = 1.0;
  double shift = 0.0;

  struct Stencil {
    std::array<std::size_t, 4> index{};
    std::array<double, 4> weight{};
    int size = 0;
  };
  Stencil stencil(const Vec& x) const;
};

/// Reduces a periodic coordinate into [-1/2, 1/2).
inline double wrap_cell(double t) { return t - std::floor(t + 0.5); }

}  // namespace homog
