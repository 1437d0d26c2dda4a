#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace homog {

inline constexpr int kMaxDim = 2;
inline constexpr double kPi = 3.14159265358979323846;

/// Point or vector in R^d, d <= 2. Unused trailing components stay zero.
using Vec = std::array<double, kMaxDim>;

/// Small dense d x d matrix, d <= 2, row-major. Entries outside the
/// active block are kept at zero so the d = 1 case needs no special code.
struct Mat {
  std::array<double, kMaxDim * kMaxDim> m{};

  double& operator()(int i, int j) { return m[kMaxDim * i + j]; }
  double operator()(int i, int j) const { return m[kMaxDim * i + j]; }

  static Mat identity(int dim, double scale = 1.0) {
    Mat a;
    for (int i = 0; i < dim; ++i) a(i, i) = scale;
    return a;
  }
  static Mat diag(double a11, double a22) {
    Mat a;
    a(0, 0) = a11;
    a(1, 1) = a22;
    return a;
  }

  Mat transposed() const {
    Mat t;
    for (int i = 0; i < kMaxDim; ++i)
      for (int j = 0; j < kMaxDim; ++j) t(i, j) = (*this)(j, i);
    return t;
  }

  Vec operator*(const Vec& v) const {
    return {m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1]};
  }
  Mat operator*(const Mat& b) const {
    Mat c;
    for (int i = 0; i < kMaxDim; ++i)
      for (int j = 0; j < kMaxDim; ++j)
        for (int k = 0; k < kMaxDim; ++k) c(i, j) += (*this)(i, k) * b(k, j);
    return c;
  }
  Mat operator+(const Mat& b) const {
    Mat c;
    for (std::size_t i = 0; i < m.size(); ++i) c.m[i] = m[i] + b.m[i];
    return c;
  }
  Mat operator-(const Mat& b) const {
    Mat c;
    for (std::size_t i = 0; i < m.size(); ++i) c.m[i] = m[i] - b.m[i];
    return c;
  }
  Mat operator*(double s) const {
    Mat c;
    for (std::size_t i = 0; i < m.size(); ++i) c.m[i] = m[i] * s;
    return c;
  }
  bool operator==(const Mat&) const = default;
};

inline Vec operator+(const Vec& a, const Vec& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec operator-(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec operator*(double s, const Vec& a) { return {s * a[0], s * a[1]}; }
inline double dot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec unit_vector(int j) {
  Vec e{};
  e[static_cast<std::size_t>(j)] = 1.0;
  return e;
}

/// Spectral (operator 2-) norm of the leading dim x dim block.
inline double operator_norm(const Mat& a, int dim) {
  if (dim == 1) return std::abs(a(0, 0));
  // largest singular value from the eigenvalues of a^T a
  const double p = a(0, 0) * a(0, 0) + a(1, 0) * a(1, 0);
  const double q = a(0, 1) * a(0, 1) + a(1, 1) * a(1, 1);
  const double r = a(0, 0) * a(0, 1) + a(1, 0) * a(1, 1);
  const double tr = p + q;
  const double disc = std::sqrt(std::max(0.0, 0.25 * (p - q) * (p - q) + r * r));
  return std::sqrt(0.5 * tr + disc);
}

/// Smallest eigenvalue of the symmetric part of the leading block.
inline double min_symmetric_eigenvalue(const Mat& a, int dim) {
  if (dim == 1) return a(0, 0);
  const double s12 = 0.5 * (a(0, 1) + a(1, 0));
  const double mean = 0.5 * (a(0, 0) + a(1, 1));
  const double half = 0.5 * (a(0, 0) - a(1, 1));
  return mean - std::sqrt(half * half + s12 * s12);
}

/// Base of the exception hierarchy. Every failure carries the pipeline
/// stage it originated from so the CLI can name it.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, std::string stage = {})
      : std::runtime_error(what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }
  void set_stage(std::string stage) { stage_ = std::move(stage); }

 private:
  std::string stage_;
};

/// Rejected input data (incompatible load, nonzero-mean potential source, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace homog
