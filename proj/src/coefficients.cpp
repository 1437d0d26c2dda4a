#include "homog/coefficients.hpp"

#include <limits>
#include <random>
#include <sstream>

#include "homog/grid.hpp"

namespace homog {

namespace {

double param(const Params& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

double c2(double t) { return std::cos(2.0 * kPi * t); }
double s2(double t) { return std::sin(2.0 * kPi * t); }

Mat isotropic(int dim, double value) { return Mat::identity(dim, value); }

}  // namespace

Mat evaluate(const CoefficientField& field, const Vec& y, const Vec& z) {
  Vec yw{}, zw{};
  for (int a = 0; a < field.dim; ++a) {
    yw[a] = wrap_cell(y[a]);
    zw[a] = wrap_cell(z[a]);
  }
  return field.evaluator(yw, zw);
}

std::vector<std::string> catalog_names() {
  return {"constant", "constant_matrix", "trig_product", "laminate",
          "modulated_laminate", "checkerboard", "skew_trig"};
}

CoefficientField make_coefficient(const std::string& name, int dim, const Params& params) {
  if (dim != 1 && dim != 2) throw ConfigError("dimension must be 1 or 2", "coefficients");
  CoefficientField f;
  f.name = name;
  f.dim = dim;
  f.params = params;

  if (name == "constant") {
    const double c = param(params, "c", 1.0);
    if (!(c > 0.0)) throw ConfigError("constant coefficient needs c > 0", "coefficients");
    f.evaluator = [dim, c](const Vec&, const Vec&) { return isotropic(dim, c); };
    f.mu = std::min(c, 1.0 / c);
    f.lipschitz_y = 0.0;
  } else if (name == "constant_matrix") {
    Mat a;
    a(0, 0) = param(params, "a11", 1.0);
    if (dim == 2) {
      a(0, 1) = param(params, "a12", 0.0);
      a(1, 0) = param(params, "a21", 0.0);
      a(1, 1) = param(params, "a22", 1.0);
    }
    const double lo = min_symmetric_eigenvalue(a, dim);
    if (!(lo > 0.0)) throw ConfigError("constant_matrix is not elliptic", "coefficients");
    f.evaluator = [a](const Vec&, const Vec&) { return a; };
    f.mu = std::min(lo, 1.0 / operator_norm(a, dim));
    f.symmetric = a(0, 1) == a(1, 0);
  } else if (name == "trig_product") {
    if (dim == 1) {
      f.evaluator = [](const Vec& y, const Vec& z) {
        return isotropic(1, (2.0 + c2(y[0])) * (2.0 + c2(z[0])));
      };
    } else {
      f.evaluator = [](const Vec& y, const Vec& z) {
        return isotropic(2, (2.0 + c2(y[0]) * c2(y[1])) * (2.0 + c2(z[0]) * c2(z[1])));
      };
    }
    // values in [1, 9]; |grad_y| of the y-factor is at most 2 pi
    f.mu = 1.0 / 9.0;
    f.lipschitz_y = 6.0 * kPi;
  } else if (name == "laminate") {
    f.evaluator = [dim](const Vec&, const Vec& z) { return isotropic(dim, 2.0 + c2(z[0])); };
    f.mu = 1.0 / 3.0;
    f.lipschitz_y = 0.0;
  } else if (name == "modulated_laminate") {
    const int last = dim - 1;
    f.evaluator = [dim, last](const Vec& y, const Vec& z) {
      return isotropic(dim, (2.0 + c2(y[last])) * (2.0 + c2(z[0])));
    };
    f.mu = 1.0 / 9.0;
    f.lipschitz_y = 6.0 * kPi;
  } else if (name == "checkerboard") {
    const double s = param(params, "sharpness", 4.0);
    if (!(s > 0.0)) throw ConfigError("checkerboard needs sharpness > 0", "coefficients");
    auto pattern = [dim](const Vec& x) { return dim == 1 ? s2(x[0]) : s2(x[0]) * s2(x[1]); };
    f.evaluator = [dim, s, pattern](const Vec& y, const Vec& z) {
      return isotropic(dim, (2.0 + std::tanh(s * pattern(y))) * (2.0 + std::tanh(s * pattern(z))));
    };
    f.mu = 1.0 / 9.0;
    f.lipschitz_y = 6.0 * kPi * s;
  } else if (name == "skew_trig") {
    if (dim != 2) throw ConfigError("skew_trig is two-dimensional", "coefficients");
    f.evaluator = [](const Vec& y, const Vec& z) {
      const double beta = (2.0 + c2(y[0])) * (2.0 + c2(z[1]));
      const double kappa = 0.5 * s2(y[1]) * (1.0 + c2(z[0]));
      Mat a = Mat::identity(2, beta);
      a(0, 1) = kappa;
      a(1, 0) = -kappa;
      return a;
    };
    // symmetric part >= 1, |a| <= sqrt(81 + 1)
    f.mu = 0.11;
    f.lipschitz_y = 6.0 * kPi;
    f.symmetric = false;
  } else {
    throw ConfigError("unknown coefficient '" + name + "'", "coefficients");
  }
  return f;
}

HypothesisReport verify_hypotheses(const CoefficientField& field, int n_samples,
                                   std::uint64_t seed) {
  if (n_samples < 1) throw InputError("verify_hypotheses needs at least one sample");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> cell(-0.5, 0.5);
  std::uniform_real_distribution<double> near(-1e-3, 1e-3);
  constexpr double kSlack = 1e-12;

  HypothesisReport rep;
  rep.mu_observed = std::numeric_limits<double>::infinity();
  const int d = field.dim;

  auto record = [&](const char* check, const Vec& y, const Vec& y2, const Vec& z, double v) {
    rep.pass = false;
    if (rep.violations.size() < 16) rep.violations.push_back({check, y, y2, z, v});
  };

  for (int s = 0; s < n_samples; ++s) {
    Vec y{}, y2{}, z{};
    // alternate far pairs and near pairs; near pairs probe the local slope
    const bool close = (s % 2) == 1;
    for (int a = 0; a < d; ++a) {
      y[a] = cell(rng);
      z[a] = cell(rng);
      y2[a] = close ? y[a] + near(rng) : cell(rng);
    }
    const Mat a = evaluate(field, y, z);
    const double lo = min_symmetric_eigenvalue(a, d);
    const double hi = operator_norm(a, d);
    rep.mu_observed = std::min(rep.mu_observed, lo);
    rep.bound_observed = std::max(rep.bound_observed, hi);
    if (lo < field.mu - kSlack) record("ellipticity", y, y2, z, lo);
    if (hi > 1.0 / field.mu + kSlack) record("boundedness", y, y2, z, hi);

    const double dy = norm(y - y2);
    if (dy > 0.0) {
      const double ratio = operator_norm(a - evaluate(field, y2, z), d) / dy;
      rep.cL_observed = std::max(rep.cL_observed, ratio);
      if (ratio > field.lipschitz_y + kSlack) record("lipschitz_y", y, y2, z, ratio);
    }
  }
  return rep;
}

ScaleCoupling ScaleCoupling::power_law(double gamma, std::vector<double> epsilons) {
  ScaleCoupling c;
  c.law = Law::power;
  c.gamma = gamma;
  c.epsilons = std::move(epsilons);
  for (double e : c.epsilons) {
    const double d = std::pow(e, gamma);
    c.deltas.push_back(d);
    c.taus.push_back(tau_of(e, d));
  }
  return c;
}

ScaleCoupling ScaleCoupling::from_table(std::vector<double> epsilons, std::vector<double> deltas) {
  if (epsilons.size() != deltas.size()) throw ConfigError("epsilon/delta tables differ in length");
  ScaleCoupling c;
  c.law = Law::table;
  c.gamma = 0.0;
  c.epsilons = std::move(epsilons);
  c.deltas = std::move(deltas);
  for (std::size_t i = 0; i < c.epsilons.size(); ++i) c.taus.push_back(tau_of(c.epsilons[i], c.deltas[i]));
  return c;
}

bool ScaleCoupling::ratio_decreasing() const {
  for (std::size_t i = 1; i < epsilons.size(); ++i)
    if (!(deltas[i] / epsilons[i] < deltas[i - 1] / epsilons[i - 1])) return false;
  return true;
}

}  // namespace homog
