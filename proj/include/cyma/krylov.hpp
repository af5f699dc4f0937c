#pragma once

// Restarted GMRES with right preconditioning, matrix-free.
//
// Works on any vector type V exposing size(), operator[] and value
// semantics (std::vector<double>, TorusField). The operator and the
// preconditioner are callables V -> V.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace cyma {

struct KrylovOptions {
  double tol = 1e-12;  ///< Relative residual target ‖b − Ax‖ ≤ tol·‖b‖.
  int max_iter = 500;  ///< Total inner iterations over all restarts.
  int restart = 60;
};

struct KrylovResult {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

namespace detail {

template <class V>
double dot(const V& a, const V& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

template <class V>
void axpy(double alpha, const V& x, V& y) {
  for (std::size_t k = 0; k < y.size(); ++k) y[k] += alpha * x[k];
}

template <class V>
void scale(V& x, double s) {
  for (std::size_t k = 0; k < x.size(); ++k) x[k] *= s;
}

}  // namespace detail

/// Solves A x = b starting from x (in/out).
template <class V, class Op, class Precond>
KrylovResult gmres(const Op& apply_a, const Precond& apply_m, const V& b, V& x, const KrylovOptions& opt) {
  using detail::axpy;
  using detail::dot;

  KrylovResult result;
  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) {
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = 0.0;
    result.converged = true;
    return result;
  }

  const int m = opt.restart;
  std::vector<V> basis;
  std::vector<V> zbasis;  // preconditioned directions
  std::vector<std::vector<double>> hess(m + 1, std::vector<double>(m, 0.0));
  std::vector<double> cs(m), sn(m), rhs(m + 1);

  while (result.iterations < opt.max_iter) {
    V r = b;
    {
      const V ax = apply_a(x);
      axpy(-1.0, ax, r);
    }
    double beta = std::sqrt(dot(r, r));
    result.relative_residual = beta / bnorm;
    if (result.relative_residual <= opt.tol) {
      result.converged = true;
      return result;
    }

    basis.clear();
    zbasis.clear();
    detail::scale(r, 1.0 / beta);
    basis.push_back(std::move(r));
    std::fill(rhs.begin(), rhs.end(), 0.0);
    rhs[0] = beta;

    int j = 0;
    for (; j < m && result.iterations < opt.max_iter; ++j) {
      ++result.iterations;
      zbasis.push_back(apply_m(basis[j]));
      V w = apply_a(zbasis[j]);
      // modified Gram-Schmidt, two passes for stability
      for (int pass = 0; pass < 2; ++pass)
        for (int i = 0; i <= j; ++i) {
          const double h = dot(w, basis[i]);
          hess[i][j] += h;
          axpy(-h, basis[i], w);
        }
      const double hn = std::sqrt(dot(w, w));
      hess[j + 1][j] = hn;

      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * hess[i][j] + sn[i] * hess[i + 1][j];
        hess[i + 1][j] = -sn[i] * hess[i][j] + cs[i] * hess[i + 1][j];
        hess[i][j] = t;
      }
      const double denom = std::hypot(hess[j][j], hess[j + 1][j]);
      cs[j] = denom == 0.0 ? 1.0 : hess[j][j] / denom;
      sn[j] = denom == 0.0 ? 0.0 : hess[j + 1][j] / denom;
      hess[j][j] = denom;
      hess[j + 1][j] = 0.0;
      rhs[j + 1] = -sn[j] * rhs[j];
      rhs[j] = cs[j] * rhs[j];

      result.relative_residual = std::abs(rhs[j + 1]) / bnorm;
      if (result.relative_residual <= opt.tol || hn == 0.0) {
        ++j;
        break;
      }
      detail::scale(w, 1.0 / hn);
      basis.push_back(std::move(w));
    }

    // back substitution for the projected least-squares problem
    std::vector<double> y(j, 0.0);
    for (int i = j - 1; i >= 0; --i) {
      double s = rhs[i];
      for (int k = i + 1; k < j; ++k) s -= hess[i][k] * y[k];
      y[i] = s / hess[i][i];
    }
    for (int i = 0; i < j; ++i) axpy(y[i], zbasis[i], x);
    for (auto& row : hess) std::fill(row.begin(), row.end(), 0.0);

    if (result.relative_residual <= opt.tol) {
      result.converged = true;
      return result;
    }
  }
  // true residual after the final cycle
  V r = b;
  axpy(-1.0, apply_a(x), r);
  result.relative_residual = std::sqrt(dot(r, r)) / bnorm;
  result.converged = result.relative_residual <= opt.tol;
  return result;
}

}  // namespace cyma
