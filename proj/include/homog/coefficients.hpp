#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "homog/types.hpp"

namespace homog {

using Params = std::map<std::string, double>;

/// Two-scale coefficient a(y, z), periodic in both arguments with cell
/// [-1/2, 1/2]^d. Immutable after construction.
struct CoefficientField {
  std::string name;
  int dim = 1;
  Params params;
  /// Raw evaluator; receives arguments already reduced to the cell.
  std::function<Mat(const Vec& y, const Vec& z)> evaluator;
  double mu = 1.0;
  double lipschitz_y = 0.0;
  bool symmetric = true;
};

/// a(y mod 1, z mod 1).
Mat evaluate(const CoefficientField& field, const Vec& y, const Vec& z);

/// Catalog lookup. Unknown names or unsupported dimensions throw ConfigError.
///
///   constant            c I                                   (param c, default 1)
///   constant_matrix     [[a11, a12], [a21, a22]]              (may be nonsymmetric)
///   trig_product        (2 + cos 2pi y)(2 + cos 2pi z) I in 1D;
///                       (2 + cos 2pi y1 cos 2pi y2)(2 + cos 2pi z1 cos 2pi z2) I in 2D
///   laminate            (2 + cos 2pi z1) I
///   modulated_laminate  (2 + cos 2pi y_d)(2 + cos 2pi z1) I
///   checkerboard        (2 + tanh(s S(y)))(2 + tanh(s S(z))) I, S = prod_i sin 2pi x_i
///   skew_trig           beta I + kappa J (2D only, nonsymmetric), J the rotation by -pi/2
CoefficientField make_coefficient(const std::string& name, int dim, const Params& params = {});
std::vector<std::string> catalog_names();

struct HypothesisWitness {
  std::string check;
  Vec y{};
  Vec y_other{};
  Vec z{};
  double value = 0.0;
};

struct HypothesisReport {
  double mu_observed = 0.0;     // smallest sampled eigenvalue of the symmetric part
  double bound_observed = 0.0;  // largest sampled operator norm
  double cL_observed = 0.0;     // largest sampled |a(y,z) - a(y',z)| / |y - y'|
  bool pass = true;
  std::vector<HypothesisWitness> violations;
};

/// Monte-Carlo check of ellipticity, boundedness and the y-Lipschitz bound
/// with 1e-12 slack. Violations are reported, never thrown.
HypothesisReport verify_hypotheses(const CoefficientField& field, int n_samples,
                                   std::uint64_t seed = 20240917);

/// delta = delta(eps) along a decreasing list of eps.
struct ScaleCoupling {
  enum class Law { power, table };
  Law law = Law::power;
  double gamma = 2.0;
  std::vector<double> epsilons;
  std::vector<double> deltas;
  std::vector<double> taus;

  static ScaleCoupling power_law(double gamma, std::vector<double> epsilons);
  static ScaleCoupling from_table(std::vector<double> epsilons, std::vector<double> deltas);

  std::size_t size() const { return epsilons.size(); }
  /// delta / eps strictly decreasing along the list.
  bool ratio_decreasing() const;
};

inline double tau_of(double eps, double delta) { return std::max(eps, delta / eps); }

}  // namespace homog
