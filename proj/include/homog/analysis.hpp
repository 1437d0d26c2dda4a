#pragma once

#include <span>
#include <string>
#include <vector>

#include "homog/corrector.hpp"
#include "homog/domain.hpp"

namespace homog {

// Norms on a bounded mesh. Values use the lumped (trapezoidal) rule and
// gradients the vertex rule, matching the bilinear form of the solvers.
double l2_norm(const GridField& u);
double h1_seminorm(const GridField& u);
double h1_norm(const GridField& u);
/// (int_{Gamma_width} |u|^2)^{1/2}; elements straddling the layer contribute
/// their exact overlap. width < h is rejected.
double boundary_layer_l2(const GridField& u, double width);
/// int_{Gamma_width} |grad u|^2.
double boundary_layer_grad2(const GridField& u, double width);
/// L2 norm of a staggered field.
double edge_l2_norm(const EdgeField& v);

struct TraceCheck {
  double ratio = 0.0;  // |u|^2_{Gamma_eps} / (eps |u| |grad u|)
  bool degenerate = false;  // grad u = 0
};
TraceCheck trace_check(const GridField& u, double eps);

/// sup_phi int R . grad phi / |grad phi| over mean-zero mesh functions,
/// from one discrete Neumann-Laplace solve.
double residual_dual_norm(const EdgeField& r, const SolverOptions& opts = {1e-12});

/// int_{Gamma_eps} |grad u|^2 / (tau |f|^2); 0 when f = 0.
double boundary_layer_check(const GridField& u_eps, double eps, double delta, double f_norm);

struct DualityCheck {
  double lhs = 0.0;  // int Phi w
  double rhs = 0.0;  // int R . grad phi
  double discrepancy = 0.0;  // |lhs - rhs| / (|Phi| |grad phi|)
  double phi_norm = 0.0;
  double grad_phi_norm = 0.0;
};
/// w = v_hat - u_eps, Phi = w - avg(w), phi the adjoint solution with data Phi.
DualityCheck duality_identity_check(const CoefficientField& field, double eps, double delta,
                                    const Approximation& approx, const GridField& u_eps, const Mat& a0,
                                    const SolverOptions& opts = {1e-12},
                                    CoefficientSampling sampling = CoefficientSampling::midpoint);

/// Smallest C with |u|^2 <= C |grad u|^2 for mean-zero mesh functions.
double poincare_constant(const DomainMesh& mesh, int iterations = 200);

struct ErrorRecord {
  double epsilon = 0.0;
  double delta = 0.0;
  double tau = 0.0;
  int mesh = 0;
  double l2_error = 0.0;            // |u_eps - u|_L2
  double h1_error = 0.0;            // |u_eps - v_hat|_H1
  double boundary_grad = 0.0;       // int_{Gamma_eps} |grad u_eps|^2
  double residual_dual_norm = 0.0;  // sup int R . grad phi / |grad phi|
  double f_norm = 0.0;              // |f|_L2
  double k_norm = 0.0;              // |eps K1 + delta K2|_L2
};

struct RateFit {
  std::string column;
  std::string abscissa;
  double slope = 0.0;
  double intercept = 0.0;
  double half_width = 0.0;  // 95% t-interval
  std::size_t points = 0;
  bool noise_floor = false;  // every error below the floor; slope meaningless
};

/// Least-squares slope of log y against log x.
RateFit fit_rate(std::span<const double> x, std::span<const double> y, double noise_floor = 1e-13);

struct ConvergenceReport {
  std::vector<ErrorRecord> records;
  std::vector<RateFit> fits;
};

/// Fits the l2, h1 and residual columns against tau (or epsilon). Needs at
/// least three records with distinct abscissae. Columns entirely below
/// 1e-9 |f| are flagged as noise floor.
ConvergenceReport fit_rates(const std::vector<ErrorRecord>& records, const std::string& abscissa = "tau");

}  // namespace homog
