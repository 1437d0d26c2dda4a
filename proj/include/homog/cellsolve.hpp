#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "homog/coefficients.hpp"
#include "homog/grid.hpp"
#include "homog/linsolve.hpp"

namespace homog {

/// Cell-centred y-samples: y_k = -1/2 + (k + 1/2) / n_y per axis, axis 0 fastest.
std::vector<Vec> y_sample_points(int dim, int n_y);
PeriodicLattice y_sample_lattice(int dim, int n_y);

/// a_hat(y) on the y-sample lattice, extended by periodic multilinear
/// interpolation.
struct AHatTable {
  int dim = 1;
  int n_y = 1;
  std::vector<Mat> samples;

  Mat operator()(const Vec& y) const;
};

/// a(y, .) at the element midpoints of a Z-grid.
std::vector<Mat> sample_z_coefficients(const CoefficientField& field, const Vec& y, const Grid& z_grid);

/// Flux density of a cell solution: (moment / edge volume) on every edge,
/// i.e. the staggered samples of a (e^j + grad u).
EdgeField flux_density(const EllipticOperator& op, const GridField& u, const Vec& background);

/// M_j(y, .): zero-mean periodic solution of div_z[a(y,z)(e^j + grad_z M)] = 0.
GridField solve_z_cell(const CoefficientField& field, const Vec& y, int j, int n,
                       const SolverOptions& opts = {}, SolveStats* stats = nullptr);

/// a_hat(y) = < a (I + grad_z M) >_Z; M holds M_1 .. M_d at this y.
Mat intermediate_matrix(const CoefficientField& field, const Vec& y, std::span<const GridField> M);

/// N_j: zero-mean periodic solution of div_y[a_hat(y)(e^j + grad_y N)] = 0.
GridField solve_y_cell(const AHatTable& a_hat, int j, int n, const SolverOptions& opts = {},
                       SolveStats* stats = nullptr);

/// a0 = < a_hat (I + grad_y N) >_Y.
Mat homogenized_matrix(const AHatTable& a_hat, std::span<const GridField> N);

/// p^j = a (e^j + grad_z M_j) - a_hat e^j on Z.
EdgeField flux_vectors(const CoefficientField& field, const Vec& y, const GridField& M_j,
                       const Mat& a_hat, int j);
/// g^j = a_hat (e^j + grad_y N_j) - a0 e^j on Y.
EdgeField flux_vectors_slow(const AHatTable& a_hat, const GridField& N_j, const Mat& a0, int j);

/// Discrete dual norm sup_chi <div v, chi> / |grad chi| over periodic grid
/// functions, evaluated with one Laplace solve.
double weak_divergence_residual(const EdgeField& v);

/// Divergence of a skew matrix field, one entry per axis-k edge:
/// (div S)_k = sum_i D_i^- S_ik.
EdgeField skew_divergence(const SkewField& s);

struct PotentialResult {
  SkewField matrix;                        // G_ik = D_i phi_k - D_k phi_i
  std::array<GridField, kMaxDim> phi;      // zero-mean potentials, Laplace phi_k = v_k
  double divergence_residual = 0.0;        // L2 norm of div G - v
  double h1_ratio = 0.0;                   // |G|_H1 / |v|_L2 (0 for v = 0)
};

/// Periodic Poisson solves for each component of a mean-zero, divergence-free
/// edge field. Rejects inputs whose mean exceeds 1e-10 of `scale`, the
/// magnitude of the quantities v was formed from (default: max |v|).
PotentialResult solve_potential(const EdgeField& v, const SolverOptions& opts = {1e-12},
                                double scale = 0.0);

/// |M_j(y + dy, .) - M_j(y, .)|_H1(Z) / |dy|.
double lipschitz_check_M(const CoefficientField& field, int j, const Vec& y, const Vec& dy, int n,
                         const SolverOptions& opts = {});

/// |e^j + grad_z u|_L2(Z) with edge difference quotients.
double corrector_gradient_norm(const GridField& u, int j);

/// H1 and L2 norms of a periodic nodal field (edge differences, lumped mass).
double periodic_h1_norm(const GridField& u);

struct CellOptions {
  int n = 64;    // Z- and Y-grid elements per axis
  int n_y = 16;  // y-samples per axis for M(y, .)
  SolverOptions solver;
};

/// All cell data for one coefficient. Built once, then read-only; the
/// z-potentials P are computed on first use and cached behind a mutex.
///
/// Memory: M holds n_y^d * d * n^d doubles, p and P d times that again.
class CellCorrectorSet {
 public:
  static CellCorrectorSet build(const CoefficientField& field, const CellOptions& opts);

  std::string coefficient;
  Params params;
  int dim = 1;
  int n = 0;
  int n_y = 0;
  std::vector<Vec> y_samples;
  std::vector<std::array<GridField, kMaxDim>> M;    // [sample][j]
  std::vector<std::array<EdgeField, kMaxDim>> p;    // [sample][j]
  AHatTable a_hat;
  std::array<GridField, kMaxDim> N;
  Mat a0;
  std::array<EdgeField, kMaxDim> g;
  std::array<PotentialResult, kMaxDim> G;
  int max_iterations = 0;
  double max_solver_residual = 0.0;

  Grid z_grid() const { return Grid::cell(dim, n); }
  Grid y_grid() const { return Grid::cell(dim, n); }

  /// P^j(y_sample, .), computed lazily.
  const PotentialResult& P(std::size_t sample, int j) const;

  double N_value(int j, const Vec& y) const;
  double N_gradient(int j, int axis, const Vec& y) const;
  double M_value(int j, const Vec& y, const Vec& z) const;

  /// Cache key from coefficient name, parameters, dimension, n and n_y.
  static std::string cache_key(const CoefficientField& field, const CellOptions& opts);
  void save(const std::filesystem::path& dir) const;
  /// Returns false if no cache entry exists for this key.
  static bool load(const std::filesystem::path& dir, const std::string& key, CellCorrectorSet& out);

 private:
  void finalize();
  std::array<std::array<std::vector<double>, kMaxDim>, kMaxDim> grad_N_;  // [j][axis]
  struct PCache {
    std::mutex mutex;
    std::vector<std::array<std::unique_ptr<PotentialResult>, kMaxDim>> slots;
  };
  std::shared_ptr<PCache> p_cache_;
};

/// Loads a cached set or builds and stores one.
CellCorrectorSet cached_cell_set(const CoefficientField& field, const CellOptions& opts,
                                 const std::filesystem::path& cache_dir);

}  // namespace homog
