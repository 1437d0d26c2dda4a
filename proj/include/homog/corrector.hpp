#pragma once

#include <functional>
#include <vector>

#include "homog/cellsolve.hpp"
#include "homog/domain.hpp"

namespace homog {

/// Gauss-Legendre rule on [-1/2, 1/2]; orders 1..10 and 20.
struct CellRule {
  std::vector<double> nodes;
  std::vector<double> weights;  // sum to 1
};
CellRule cell_rule(int order);

/// (phi)_delta(x) = int_Z phi(x - delta sigma) dsigma at the mesh nodes, by
/// the tensor Gauss-Legendre rule of the given order.
GridField steklov_smooth(const std::function<double(const Vec&)>& phi, const DomainMesh& mesh,
                         double delta, int order = 4);
/// Same for a field extended beyond the mesh (margin at least delta / 2).
GridField steklov_smooth(const ExtendedField& phi, const DomainMesh& mesh, double delta, int order = 4);

struct Approximation {
  GridField u0;
  GridField K1;
  GridField K2;
  GridField v_hat;  // u0 + eps K1 + delta K2
  double eps = 0.0;
  double delta = 0.0;
};

/// v = u + eps N(y) . grad u + delta M(y, z) . (I + grad_y N(y)) grad u,
/// y = x / eps, z = x / delta; grad u by centred differences.
GridField first_approx_plain(const GridField& u0, const CellCorrectorSet& cells, double eps, double delta);

struct SmoothingOptions {
  int order = 4;
  ExtensionKind extension = ExtensionKind::even;
};

/// The Steklov-smoothed approximation: K1 = int_Z N(y') . grad u(x') dsigma and
/// K2 = int_Z M(y', z) . (I + grad_y N(y')) grad u(x') dsigma with
/// x' = x - delta sigma, y' = x/eps - (delta/eps) sigma, z = x/delta.
Approximation first_approx_smoothed(const GridField& u0, const CellCorrectorSet& cells, double eps,
                                    double delta, const SmoothingOptions& opts = {});

/// R = a^eps grad v_hat - a0 grad u as edge densities of the flux moments, so
/// that sum_E |E| R . D^+ phi reproduces B(v_hat, phi) - B0(u, phi) exactly.
EdgeField residual_field(const CoefficientField& field, double eps, double delta,
                         const Approximation& approx, const Mat& a0,
                         CoefficientSampling sampling = CoefficientSampling::midpoint);

}  // namespace homog
