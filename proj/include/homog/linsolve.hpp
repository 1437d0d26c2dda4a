#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "homog/grid.hpp"

namespace homog {

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
  std::vector<double> history;
};

/// Krylov non-convergence; carries the residual history.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, SolveStats stats)
      : Error(what, "solve"), stats_(std::move(stats)) {}
  const SolveStats& stats() const { return stats_; }

 private:
  SolveStats stats_;
};

enum class SolverMethod { automatic, cg, bicgstab, direct_1d };

struct SolverOptions {
  double rel_tol = 1e-10;
  int max_iter = 0;  // 0: 10 * unknowns
  SolverMethod method = SolverMethod::automatic;
  bool jacobi = true;
};

using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

// Both Krylov solvers treat A as singular with the constants as null space:
// the residual is kept orthogonal to constants, and the caller fixes the mean
// of the returned iterate.
SolveStats conjugate_gradient(const LinearOperator& a, std::span<const double> diag,
                              std::span<const double> b, std::span<double> x,
                              const SolverOptions& opts);
SolveStats bicgstab(const LinearOperator& a, std::span<const double> diag,
                    std::span<const double> b, std::span<double> x, const SolverOptions& opts);

/// Exact solve of the 1D Q1 system by summing the load into edge fluxes.
/// Handles periodic and bounded (Neumann) grids; the result has arbitrary mean.
void solve_flux_sweep_1d(const Grid& grid, std::span<const Mat> coef, std::span<const double> b,
                         std::span<double> x);

/// The discrete operator (A u)_k = B(u, phi_k) for one coefficient sampling.
class EllipticOperator {
 public:
  EllipticOperator(const Grid& grid, std::vector<Mat> coef);

  const Grid& grid() const { return grid_; }
  std::span<const Mat> coefficients() const { return coef_; }
  bool symmetric() const { return symmetric_; }

  void apply(std::span<const double> u, std::span<double> out) const;
  /// Flux moments with an optional constant background gradient.
  std::vector<double> flux_moments(std::span<const double> u, const Vec& background = {}) const;
  /// B(u, v).
  double form(std::span<const double> u, std::span<const double> v) const;

  /// Solves A u = b for the weighted-mean-zero u. b is projected onto the
  /// range (Euclidean zero sum) first.
  std::vector<double> solve(std::span<const double> b, const SolverOptions& opts = {},
                            SolveStats* stats = nullptr) const;

  EllipticOperator transposed() const;

 private:
  Grid grid_;
  std::vector<Mat> coef_;
  bool symmetric_ = true;
};

}  // namespace homog
