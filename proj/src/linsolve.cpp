#include "homog/linsolve.hpp"

#include <cmath>
#include <sstream>

#include "homog/kernels.hpp"

namespace homog {

namespace {

void project_zero_sum(std::span<double> r) {
  const double m = kernels::sum(r) / static_cast<double>(r.size());
  for (double& v : r) v -= m;
}

void precondition(std::span<const double> diag, std::span<const double> r, std::span<double> z) {
  if (diag.empty()) {
    std::copy(r.begin(), r.end(), z.begin());
    return;
  }
  for (std::size_t i = 0; i < r.size(); ++i) z[i] = diag[i] > 0.0 ? r[i] / diag[i] : r[i];
}

int iteration_cap(const SolverOptions& opts, std::size_t n) {
  return opts.max_iter > 0 ? opts.max_iter : static_cast<int>(10 * n);
}

[[noreturn]] void fail(const char* method, SolveStats stats) {
  std::ostringstream os;
  os << method << " did not converge: relative residual " << stats.relative_residual << " after "
     << stats.iterations << " iterations";
  throw SolverError(os.str(), std::move(stats));
}

}  // namespace

SolveStats conjugate_gradient(const LinearOperator& a, std::span<const double> diag,
                              std::span<const double> b, std::span<double> x,
                              const SolverOptions& opts) {
  const std::size_t n = b.size();
  SolveStats stats;
  const double norm_b = std::sqrt(kernels::dot(b, b));
  if (norm_b == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    stats.converged = true;
    return stats;
  }

  std::vector<double> r(n), z(n), p(n), ap(n);
  a(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  project_zero_sum(r);
  precondition(diag, r, z);
  p = z;
  double rz = kernels::dot(r, z);
  stats.relative_residual = std::sqrt(kernels::dot(r, r)) / norm_b;
  stats.history.push_back(stats.relative_residual);

  const int cap = iteration_cap(opts, n);
  while (stats.relative_residual > opts.rel_tol && stats.iterations < cap) {
    a(p, ap);
    const double pap = kernels::dot(p, ap);
    if (!(pap > 0.0)) break;
    const double alpha = rz / pap;
    kernels::axpy(alpha, p, x);
    kernels::axpy(-alpha, ap, r);
    project_zero_sum(r);
    ++stats.iterations;
    stats.relative_residual = std::sqrt(kernels::dot(r, r)) / norm_b;
    stats.history.push_back(stats.relative_residual);
    if (stats.relative_residual <= opts.rel_tol) break;
    precondition(diag, r, z);
    const double rz_next = kernels::dot(r, z);
    kernels::xpby(z, rz_next / rz, p);
    rz = rz_next;
  }
  stats.converged = stats.relative_residual <= opts.rel_tol;
  if (!stats.converged) fail("conjugate gradient", std::move(stats));
  return stats;
}

SolveStats bicgstab(const LinearOperator& a, std::span<const double> diag,
                    std::span<const double> b, std::span<double> x, const SolverOptions& opts) {
  const std::size_t n = b.size();
  SolveStats stats;
  const double norm_b = std::sqrt(kernels::dot(b, b));
  if (norm_b == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    stats.converged = true;
    return stats;
  }

  std::vector<double> r(n), r_hat(n), p(n, 0.0), v(n, 0.0), p_hat(n), s(n), s_hat(n), t(n);
  a(x, t);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - t[i];
  project_zero_sum(r);
  r_hat = r;
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  stats.relative_residual = std::sqrt(kernels::dot(r, r)) / norm_b;
  stats.history.push_back(stats.relative_residual);

  const int cap = iteration_cap(opts, n);
  while (stats.relative_residual > opts.rel_tol && stats.iterations < cap) {
    const double rho_next = kernels::dot(r_hat, r);
    if (rho_next == 0.0) {
      // restart on breakdown
      r_hat = r;
      std::fill(p.begin(), p.end(), 0.0);
      std::fill(v.begin(), v.end(), 0.0);
      rho = alpha = omega = 1.0;
      continue;
    }
    const double beta = (rho_next / rho) * (alpha / omega);
    rho = rho_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    precondition(diag, p, p_hat);
    a(p_hat, v);
    alpha = rho / kernels::dot(r_hat, v);
    for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    ++stats.iterations;
    if (std::sqrt(kernels::dot(s, s)) / norm_b <= opts.rel_tol) {
      kernels::axpy(alpha, p_hat, x);
      r = s;
      project_zero_sum(r);
      stats.relative_residual = std::sqrt(kernels::dot(r, r)) / norm_b;
      stats.history.push_back(stats.relative_residual);
      break;
    }
    precondition(diag, s, s_hat);
    a(s_hat, t);
    const double tt = kernels::dot(t, t);
    omega = tt > 0.0 ? kernels::dot(t, s) / tt : 0.0;
    kernels::axpy(alpha, p_hat, x);
    kernels::axpy(omega, s_hat, x);
    for (std::size_t i = 0; i < n; ++i) r[i] = s[i] - omega * t[i];
    project_zero_sum(r);
    stats.relative_residual = std::sqrt(kernels::dot(r, r)) / norm_b;
    stats.history.push_back(stats.relative_residual);
    if (omega == 0.0) break;
  }
  stats.converged = stats.relative_residual <= opts.rel_tol;
  if (!stats.converged) fail("BiCGStab", std::move(stats));
  return stats;
}

void solve_flux_sweep_1d(const Grid& grid, std::span<const Mat> coef, std::span<const double> b,
                         std::span<double> x) {
  // Node k balances W_{k-1} - W_k = h b_k with W_k = a_k (x_{k+1} - x_k).
  const double h = grid.h();
  const int n = grid.n;
  std::vector<double> flux(static_cast<std::size_t>(n));
  double running = 0.0;
  for (int k = 0; k < n; ++k) {
    running += h * b[static_cast<std::size_t>(k)];
    flux[static_cast<std::size_t>(k)] = -running;
  }
  if (grid.periodic) {
    // W_k = C - h sum_{i<=k} b_i; C closes the loop sum_k (x_{k+1} - x_k) = 0.
    double inv_sum = 0.0, weighted = 0.0;
    for (int k = 0; k < n; ++k) {
      const double inv_a = 1.0 / coef[static_cast<std::size_t>(k)](0, 0);
      inv_sum += inv_a;
      weighted += flux[static_cast<std::size_t>(k)] * inv_a;
    }
    const double c = -weighted / inv_sum;
    for (double& f : flux) f += c;
  }
  x[0] = 0.0;
  const int last = grid.periodic ? n - 1 : n;
  for (int k = 0; k < last; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    x[kk + 1] = x[kk] + flux[kk] / coef[kk](0, 0);
  }
}

EllipticOperator::EllipticOperator(const Grid& grid, std::vector<Mat> coef)
    : grid_(grid), coef_(std::move(coef)) {
  if (coef_.size() != grid_.num_elements())
    throw InputError("coefficient samples do not match the element count");
  if (grid_.dim == 2) {
    for (const Mat& a : coef_) {
      const double scale = std::abs(a(0, 1)) + std::abs(a(1, 0)) + 1e-300;
      if (std::abs(a(0, 1) - a(1, 0)) > 1e-14 * scale) {
        symmetric_ = false;
        break;
      }
    }
  }
}

void EllipticOperator::apply(std::span<const double> u, std::span<double> out) const {
  // one buffer per thread; operators are shared read-only across workers
  thread_local std::vector<double> scratch;
  scratch.resize(static_cast<std::size_t>(grid_.dim) * grid_.num_nodes());
  kernels::apply_operator(grid_, coef_, u, out, scratch);
}

std::vector<double> EllipticOperator::flux_moments(std::span<const double> u,
                                                   const Vec& background) const {
  std::vector<double> w(static_cast<std::size_t>(grid_.dim) * grid_.num_nodes());
  kernels::flux_moments(grid_, coef_, u, background, w);
  return w;
}

double EllipticOperator::form(std::span<const double> u, std::span<const double> v) const {
  std::vector<double> au(grid_.num_nodes());
  apply(u, au);
  return kernels::dot(v, au);
}

std::vector<double> EllipticOperator::solve(std::span<const double> b, const SolverOptions& opts,
                                            SolveStats* stats) const {
  const std::size_t n = grid_.num_nodes();
  std::vector<double> rhs(b.begin(), b.end());
  project_zero_sum(rhs);
  std::vector<double> x(n, 0.0);

  SolverMethod method = opts.method;
  if (method == SolverMethod::automatic) {
    if (grid_.dim == 1)
      method = SolverMethod::direct_1d;
    else
      method = symmetric_ ? SolverMethod::cg : SolverMethod::bicgstab;
  }

  SolveStats local;
  if (method == SolverMethod::direct_1d) {
    if (grid_.dim != 1) throw InputError("direct flux sweep is one-dimensional");
    solve_flux_sweep_1d(grid_, coef_, rhs, x);
    local.converged = true;
    std::vector<double> ax(n);
    apply(x, ax);
    double rr = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      rr += (rhs[i] - ax[i]) * (rhs[i] - ax[i]);
      bb += rhs[i] * rhs[i];
    }
    local.relative_residual = bb > 0.0 ? std::sqrt(rr / bb) : 0.0;
  } else {
    const std::vector<double> diag =
        opts.jacobi ? kernels::operator_diagonal(grid_, coef_) : std::vector<double>{};
    LinearOperator op = [this](std::span<const double> in, std::span<double> out) { apply(in, out); };
    local = method == SolverMethod::cg ? conjugate_gradient(op, diag, rhs, x, opts)
                                       : bicgstab(op, diag, rhs, x, opts);
  }

  GridField field(grid_, std::move(x));
  field.remove_mean();
  if (stats) *stats = std::move(local);
  return std::move(field.values);
}

EllipticOperator EllipticOperator::transposed() const {
  std::vector<Mat> t(coef_.size());
  for (std::size_t e = 0; e < coef_.size(); ++e) t[e] = coef_[e].transposed();
  return EllipticOperator(grid_, std::move(t));
}

}  // namespace homog
