#pragma once

#include <string>
#include <vector>

#include "homog/coefficients.hpp"
#include "homog/grid.hpp"
#include "homog/linsolve.hpp"

namespace homog {

/// The rectangle [0, L]^d with m elements per axis.
struct DomainMesh {
  Grid grid;

  static DomainMesh make(int dim, int m, double length = 1.0);
  int dim() const { return grid.dim; }
  int m() const { return grid.n; }
  double h() const { return grid.h(); }
  double length() const { return grid.length; }

  /// Nodes within distance `width` of the boundary.
  std::vector<char> layer_mask(double width) const;
  /// |e intersect Gamma_width| / |e| for every element, exact.
  std::vector<double> layer_fraction(double width) const;
  /// |Gamma_width| = L^d - (L - 2 width)^d.
  double layer_volume(double width) const;
};

/// f(x) = prod_i cos(k_i pi x_i / L); mean zero whenever some k_i > 0.
struct Forcing {
  int dim = 1;
  double length = 1.0;
  std::vector<int> modes{1};

  /// "1" or "1,0" (one mode number per axis; missing axes get 0).
  static Forcing parse(const std::string& spec, int dim, double length = 1.0);
  double value(const Vec& x) const;
  /// int_0^x f in 1D.
  double antiderivative(double x) const;
  /// |f|_L2(Omega), exact.
  double l2_norm() const;
  GridField sample(const DomainMesh& mesh) const;
};

struct DomainSolution {
  GridField u;
  SolveStats stats;
  bool under_resolved = false;  // h > delta / 8
  double energy_defect = 0.0;   // |B(u,u) - (f,u)| / max(|B(u,u)|, tiny)
};

/// How a^eps is reduced to one matrix per element. `harmonic` (1D only) uses
/// the element harmonic mean, which makes the discrete flux of a 1D solution
/// exact; `midpoint` samples the element centre.
enum class CoefficientSampling { midpoint, harmonic };
CoefficientSampling parse_sampling(const std::string& name);

/// a^eps(x) = a(x/eps, x/delta) reduced per element.
std::vector<Mat> sample_fine_coefficients(const CoefficientField& field, double eps, double delta,
                                          const Grid& grid, bool transpose = false,
                                          CoefficientSampling sampling = CoefficientSampling::midpoint);

/// Lumped load vector w_k f_k.
std::vector<double> load_vector(const GridField& f);

/// Throws InputError when |int f| > tol |f|_L2 |Omega|^{1/2}.
void check_compatible(const GridField& f, double tol = 1e-6);

DomainSolution solve_fine(const CoefficientField& field, double eps, double delta, const GridField& f,
                          const SolverOptions& opts = {},
                          CoefficientSampling sampling = CoefficientSampling::midpoint);
DomainSolution solve_adjoint(const CoefficientField& field, double eps, double delta,
                             const GridField& phi, const SolverOptions& opts = {},
                             CoefficientSampling sampling = CoefficientSampling::midpoint);

struct HomogenizedSolution {
  DomainSolution solution;
  /// Discrete |D^2 u|_L2 / |f|_L2 over interior nodes; recorded, never asserted.
  double second_difference_ratio = 0.0;
};
HomogenizedSolution solve_homogenized(const Mat& a0, const GridField& f, const SolverOptions& opts = {});

class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double achieved)
      : Error(what, "solve"), achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

/// The 1D fine solution by integrating the conservation law:
/// u' = -F / a^eps with F the antiderivative of f, mean fixed to zero.
/// Integrals use adaptive Gauss-Kronrod on panels no longer than delta / 4.
class ExactFine1D {
 public:
  ExactFine1D(const CoefficientField& field, double eps, double delta, Forcing f, double tol = 1e-10);

  double derivative(double x) const;
  double value(double x) const;
  /// Values at the nodes of a mesh, from one cumulative sweep.
  std::vector<double> nodal(const DomainMesh& mesh) const;
  double constant() const { return c_; }

 private:
  double integrate(double a, double b, bool weighted) const;
  CoefficientField field_;
  double eps_, delta_;
  Forcing f_;
  double tol_;
  double c_ = 0.0;
};

enum class ExtensionKind { even, odd };
ExtensionKind parse_extension(const std::string& name);

/// A field on Omega extended by reflection to a margin of whole cells.
struct ExtendedField {
  GridField field;  // box grid starting pad cells before 0
  int pad = 0;

  double value(const Vec& x) const;
};

/// Reflection across each face, coordinatewise. Even: u(-x) = u(x); odd:
/// u(-x) = 2 u(0) - u(x) (keeps C^1 across the face).
ExtendedField extend(const GridField& u, double margin, ExtensionKind kind = ExtensionKind::even);

/// Multilinear interpolation of a nodal field on a bounded grid (clamped).
double interpolate(const GridField& f, const Vec& x);

}  // namespace homog
