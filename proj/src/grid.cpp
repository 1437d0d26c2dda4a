#include "homog/grid.hpp"


namespace homog {

double GridField::integral() const {
  double s = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) s += grid.node_weight(k) * values[k];
  return s;
}

void GridField::remove_mean() {
  const double m = mean();
  for (double& v : values) v -= m;
}

double EdgeField::mean(int i) const {
  double s = 0.0;
  double vol = 0.0;
  for (std::size_t k = 0; k < grid.num_nodes(); ++k) {
    const double w = grid.edge_volume(k, i);
    s += w * comp[i][k];
    vol += w;
  }
  return vol > 0.0 ? s / vol : 0.0;
}

std::array<std::vector<double>, kMaxDim> nodal_gradient(const GridField& f) {
  const Grid& g = f.grid;
  const double h = g.h();
  std::array<std::vector<double>, kMaxDim> grad;
  for (int axis = 0; axis < g.dim; ++axis) {
    auto& out = grad[axis];
    out.assign(g.num_nodes(), 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t kk = 0; kk < static_cast<std::ptrdiff_t>(g.num_nodes()); ++kk) {
      const auto k = static_cast<std::size_t>(kk);
      const long prev = g.neighbour(k, axis, -1);
      const long next = g.neighbour(k, axis, +1);
      const auto& v = f.values;
      if (prev >= 0 && next >= 0) {
        out[k] = (v[static_cast<std::size_t>(next)] - v[static_cast<std::size_t>(prev)]) / (2.0 * h);
      } else if (prev < 0) {
        const auto n1 = static_cast<std::size_t>(next);
        const auto n2 = static_cast<std::size_t>(g.neighbour(n1, axis, +1));
        out[k] = (-3.0 * v[k] + 4.0 * v[n1] - v[n2]) / (2.0 * h);
      } else {
        const auto p1 = static_cast<std::size_t>(prev);
        const auto p2 = static_cast<std::size_t>(g.neighbour(p1, axis, -1));
        out[k] = (3.0 * v[k] - 4.0 * v[p1] + v[p2]) / (2.0 * h);
      }
    }
  }
  return grad;
}

PeriodicLattice::Stencil PeriodicLattice::stencil(const Vec& x) const {
  std::array<std::size_t, 2> lo{};
  std::array<std::size_t, 2> hi{};
  std::array<double, 2> frac{};
  for (int a = 0; a < dim; ++a) {
    const double t = (x[a] - origin) / spacing - shift;
    const double fl = std::floor(t);
    frac[a] = t - fl;
    long i = static_cast<long>(fl) % count;
    if (i < 0) i += count;
    lo[a] = static_cast<std::size_t>(i);
    hi[a] = static_cast<std::size_t>((i + 1) % count);
  }
  Stencil s;
  const auto c = static_cast<std::size_t>(count);
  if (dim == 1) {
    s.size = 2;
    s.index = {lo[0], hi[0], 0, 0};
    s.weight = {1.0 - frac[0], frac[0], 0.0, 0.0};
  } else {
    s.size = 4;
    s.index = {lo[0] + c * lo[1], hi[0] + c * lo[1], lo[0] + c * hi[1], hi[0] + c * hi[1]};
    s.weight = {(1.0 - frac[0]) * (1.0 - frac[1]), frac[0] * (1.0 - frac[1]),
                (1.0 - frac[0]) * frac[1], frac[0] * frac[1]};
  }
  return s;
}

}  // namespace homog
