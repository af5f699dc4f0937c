#pragma once

// Newton-Krylov continuity solver for
//
//   A11[u]·A22[u] − A12[u]² = E1 + (1−τ)·E2 + τ·E2·e^F,   mean(u) = 0,
//
// marching τ from 0 (where u = 0 is exact) to 1.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "cyma/error.hpp"
#include "cyma/grid.hpp"
#include "cyma/krylov.hpp"
#include "cyma/macoeffs.hpp"

namespace cyma {

enum class JacobianMode {
  Exact,    ///< Fréchet derivative of A11·A22 − A12².
  Shifted,  ///< Shifted coefficients A_ij[v] + C_ij, used as a quasi-Newton operator.
};

inline std::string to_string(JacobianMode m) { return m == JacobianMode::Exact ? "exact" : "shifted"; }

inline JacobianMode jacobian_mode_from_string(const std::string& s) {
  if (s == "exact") return JacobianMode::Exact;
  if (s == "shifted") return JacobianMode::Shifted;
  throw Error(Errc::ParseError, "unknown jacobian mode '" + s + "'");
}

struct LineSearchOptions {
  double shrink = 0.5;
  double min_step = 1e-6;
};

struct SolverConfig {
  TorusGrid grid{64, 64};
  Backend backend = Backend::Spectral;
  double newton_tol = 1e-10;
  int max_newton = 30;
  int tau_steps = 8;
  LineSearchOptions line_search;
  KrylovOptions linear_solver{1e-12, 500, 60};
  JacobianMode jacobian_mode = JacobianMode::Exact;

  void check() const {
    if (!(newton_tol > 0) || !(line_search.min_step > 0) || !(linear_solver.tol > 0))
      throw Error(Errc::InvalidArgument, "solver tolerances must be positive");
    if (!(line_search.shrink > 0 && line_search.shrink < 1))
      throw Error(Errc::InvalidArgument, "line-search shrink factor must lie in (0,1)");
    if (tau_steps < 1) throw Error(Errc::InvalidArgument, "tau_steps must be >= 1");
    if (max_newton < 1 || linear_solver.max_iter < 1 || linear_solver.restart < 1)
      throw Error(Errc::InvalidArgument, "iteration limits must be >= 1");
  }
};

struct OperatorTriple {
  TorusField A11, A12, A22;
};

inline OperatorTriple operator_fields(const TorusField& u, const Derivatives& d, const MACoefficients& c) {
  OperatorTriple a;
  a.A11 = d.d11 + c.B11 * d.d2 + c.C11 + c.D * u;
  a.A12 = d.d12 + c.B12 * d.d2 + c.C12;
  a.A22 = d.d22 + c.B22 * d.d2 + c.C22;
  return a;
}

inline OperatorTriple operator_fields(const TorusField& u, const MACoefficients& c, Backend backend) {
  return operator_fields(u, derivatives(u, backend), c);
}

inline constexpr double kNormalizedFTolerance = 1e-8;

inline void require_normalized(const TorusField& expF) {
  const double defect = integral_mean(expF) - 1.0;
  if (!(std::abs(defect) <= kNormalizedFTolerance))
    throw Error(Errc::UnnormalizedF, "mean(e^F) - 1 = " + std::to_string(defect) + "; apply normalize_F first");
}

namespace detail {

inline TorusField residual_from(const OperatorTriple& a, const MACoefficients& c, const TorusField& expF,
                                double tau) {
  TorusField t = a.A11 * a.A22 - a.A12 * a.A12;
  t -= c.E1 + (1.0 - tau) * c.E2;
  t -= (tau * c.E2) * expF;
  return t;
}

}  // namespace detail

/// T(u,τ) = A11·A22 − A12² − E1 − (1−τ)E2 − τ·E2·e^F, pointwise.
inline TorusField residual(const TorusField& u, const MACoefficients& c, const TorusField& F, double tau,
                           Backend backend) {
  require_same_grid(u, F);
  const TorusField expF = exp(F);
  require_normalized(expF);
  return detail::residual_from(operator_fields(u, c, backend), c, expF, tau);
}

struct Ellipticity {
  double min_a11 = 0;
  double min_a22 = 0;
  bool positive() const { return min_a11 > 0.0 && min_a22 > 0.0; }
};

inline Ellipticity ellipticity(const OperatorTriple& a) { return {min_value(a.A11), min_value(a.A22)}; }

inline Ellipticity ellipticity(const TorusField& u, const MACoefficients& c, Backend backend) {
  return ellipticity(operator_fields(u, c, backend));
}

/// Linear second-order operator obtained by linearizing at v:
///   L w = p11·w_11 + p12·w_12 + p22·w_22 + p2·w_2 + p0·w.
class LinearizedOperator {
 public:
  LinearizedOperator(const OperatorTriple& a, const MACoefficients& c, Backend backend, JacobianMode mode)
      : backend_(backend) {
    if (mode == JacobianMode::Exact) {
      p11_ = a.A22;
      p12_ = -2.0 * a.A12;
      p22_ = a.A11;
      p0_ = c.D * a.A22;
    } else {
      p11_ = a.A22 + c.C22;
      p12_ = -2.0 * (a.A12 + c.C12);
      p22_ = a.A11 + c.C11;
      p0_ = c.D * (a.A22 + c.C22);
    }
    p2_ = c.B11 * p11_ + c.B12 * p12_ + c.B22 * p22_;
    mean11_ = integral_mean(p11_);
    mean22_ = integral_mean(p22_);
  }

  TorusField operator()(const TorusField& w) const {
    const Derivatives d = derivatives(w, backend_);
    TorusField out = p11_ * d.d11;
    out += p12_ * d.d12;
    out += p22_ * d.d22;
    out += p2_ * d.d2;
    out += p0_ * w;
    return out;
  }

  /// Inverse of the constant-coefficient operator mean(p11)·∂₁₁ + mean(p22)·∂₂₂,
  /// applied per Fourier mode with the backend's second-derivative symbol.
  /// The mean mode maps to zero.
  TorusField precondition(const TorusField& r) const {
    const auto& g = r.grid();
    const detail::Spectrum s(r);
    const Backend b = backend_;
    const double a1 = mean11_, a2 = mean22_;
    auto symbol = [b](int k, int n) {
      if (b == Backend::Spectral) return detail::second_symbol(k);
      const double sn = std::sin(std::numbers::pi * k / n);
      return -4.0 * n * n * sn * sn;
    };
    return s.apply([&](int k1, int k2, bool, bool) {
      if (k1 == 0 && k2 == 0) return std::complex<double>(0.0);
      return std::complex<double>(1.0 / (a1 * symbol(k1, g.n1) + a2 * symbol(k2, g.n2)));
    });
  }

 private:
  Backend backend_;
  TorusField p11_, p12_, p22_, p2_, p0_;
  double mean11_ = 1, mean22_ = 1;
};

/// L w for the linearization at v.
inline TorusField apply_jacobian(const TorusField& v, const TorusField& w, const MACoefficients& c, Backend backend,
                                 JacobianMode mode = JacobianMode::Exact) {
  require_same_grid(v, w);
  return LinearizedOperator(operator_fields(v, c, backend), c, backend, mode)(w);
}

struct NewtonStats {
  double residual_before = 0;  ///< sup of the zero-mean-projected residual
  double residual_after = 0;
  double step = 0;
  int halvings = 0;
  int linear_iterations = 0;
  double linear_residual = 0;
  Ellipticity ellipticity_after;
};

namespace detail {

struct Evaluation {
  OperatorTriple a;
  TorusField projected_residual;
  double sup = 0;
};

inline Evaluation evaluate(const TorusField& u, const MACoefficients& c, const TorusField& expF, double tau,
                           Backend backend) {
  Evaluation e;
  e.a = operator_fields(u, c, backend);
  e.projected_residual = project_zero_mean(residual_from(e.a, c, expF, tau));
  e.sup = sup_abs(e.projected_residual);
  return e;
}

inline std::pair<TorusField, NewtonStats> newton_step_impl(const TorusField& u, const Evaluation& current,
                                                           const MACoefficients& c, const TorusField& expF,
                                                           double tau, const SolverConfig& cfg) {
  const Ellipticity ell = ellipticity(current.a);
  if (!ell.positive())
    throw Error(Errc::InvalidArgument, "newton_step requires min A11 > 0 and min A22 > 0 at the current iterate");

  NewtonStats stats;
  stats.residual_before = current.sup;

  const LinearizedOperator op(current.a, c, cfg.backend, cfg.jacobian_mode);
  const TorusField rhs = -current.projected_residual;
  TorusField w(u.grid());
  const KrylovResult kr = gmres(
      [&](const TorusField& x) { return project_zero_mean(op(x)); },
      [&](const TorusField& x) { return op.precondition(x); }, rhs, w, cfg.linear_solver);
  stats.linear_iterations = kr.iterations;
  stats.linear_residual = kr.relative_residual;
  if (!kr.converged && !(kr.relative_residual <= 1e-6))
    throw Error(Errc::LinearSolveFailed, "Krylov solve stalled at relative residual " +
                                             std::to_string(kr.relative_residual));

  for (double s = 1.0; s >= cfg.line_search.min_step; s *= cfg.line_search.shrink) {
    TorusField trial = project_zero_mean(u + s * w);
    Evaluation e = evaluate(trial, c, expF, tau, cfg.backend);
    const Ellipticity te = ellipticity(e.a);
    if (te.positive() && e.sup <= current.sup) {
      stats.step = s;
      stats.residual_after = e.sup;
      stats.ellipticity_after = te;
      return {std::move(trial), stats};
    }
    ++stats.halvings;
  }
  throw Error(Errc::LineSearchFailed, "no admissible step length >= " + std::to_string(cfg.line_search.min_step));
}

}  // namespace detail

/// One damped Newton update on the zero-mean subspace.
inline std::pair<TorusField, NewtonStats> newton_step(const TorusField& u, const MACoefficients& c,
                                                      const TorusField& F, double tau, const SolverConfig& cfg) {
  require_same_grid(u, F);
  const TorusField expF = exp(F);
  require_normalized(expF);
  return detail::newton_step_impl(u, detail::evaluate(u, c, expF, tau, cfg.backend), c, expF, tau, cfg);
}

inline double apriori_bound(const MACoefficients& c) {
  return 2.0 * (std::abs(c.B11) + 1.0) * std::abs(c.B22) * std::exp(2.0 * c.C22) + c.C11 + c.C22;
}

struct StageRecord {
  double tau = 0;
  int newton_iterations = 0;
  double residual_sup = 0;
  double min_a11 = 0;
  double min_a22 = 0;
  int line_search_activations = 0;
  int linear_iterations = 0;
};

struct SolveReport {
  TorusGrid grid;
  Backend backend = Backend::Spectral;
  JacobianMode jacobian_mode = JacobianMode::Exact;
  std::vector<StageRecord> stages;
  int failed_stage_attempts = 0;
  double final_residual_sup = 0;  ///< sup of the projected residual at τ = 1
  double final_residual_mean = 0;
  double u_mean = 0;
  double min_a11 = 0;
  double min_a22 = 0;
  double min_Du_minus_C11 = 0;  ///< min over the grid of D·u − C11
  double min_C11_plus_Du = 0;   ///< min over the grid of C11 + D·u
  NormReport norms;
  double apriori_bound = 0;
  bool c2_within_bound = false;
  double wall_time_s = 0;

  int total_newton_iterations() const {
    int n = 0;
    for (const auto& s : stages) n += s.newton_iterations;
    return n;
  }
};

/// Carries the last accepted continuation state.
class HomotopyFailure : public Error {
 public:
  HomotopyFailure(const std::string& what, double last_tau, TorusField last_u)
      : Error(Errc::HomotopyFailed, what), last_tau_(last_tau), last_u_(std::move(last_u)) {}
  double last_tau() const noexcept { return last_tau_; }
  const TorusField& last_u() const noexcept { return last_u_; }

 private:
  double last_tau_;
  TorusField last_u_;
};

struct SolveResult {
  TorusField u;
  SolveReport report;
};

namespace detail {

/// Newton iteration at fixed τ. Returns false on failure, leaving `u` untouched.
inline bool solve_stage(TorusField& u, const MACoefficients& c, const TorusField& expF, double tau,
                        const SolverConfig& cfg, StageRecord& rec) {
  TorusField it = u;
  rec = StageRecord{};
  rec.tau = tau;
  Evaluation e = evaluate(it, c, expF, tau, cfg.backend);
  for (int k = 0;; ++k) {
    if (e.sup <= cfg.newton_tol) {
      const Ellipticity ell = ellipticity(e.a);
      rec.residual_sup = e.sup;
      rec.min_a11 = ell.min_a11;
      rec.min_a22 = ell.min_a22;
      u = std::move(it);
      return true;
    }
    if (k >= cfg.max_newton) return false;
    try {
      auto [next, stats] = newton_step_impl(it, e, c, expF, tau, cfg);
      ++rec.newton_iterations;
      rec.linear_iterations += stats.linear_iterations;
      if (stats.halvings > 0) ++rec.line_search_activations;
      it = std::move(next);
    } catch (const Error& err) {
      if (err.code() == Errc::LineSearchFailed || err.code() == Errc::LinearSolveFailed ||
          err.code() == Errc::InvalidArgument)
        return false;
      throw;
    }
    e = evaluate(it, c, expF, tau, cfg.backend);
  }
}

}  // namespace detail

inline constexpr double kMinTauStep = 1e-4;

/// Continuation in τ with halving on failure and doubling back on success.
inline SolveResult continuity_solve(const MACoefficients& c, const TorusField& F, const SolverConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  cfg.check();
  if (!(F.grid() == cfg.grid)) throw Error(Errc::GridMismatch, "F grid differs from the solver grid");
  if (!F.all_finite()) throw Error(Errc::InvalidArgument, "F contains non-finite values");
  const ValidationReport hyp = check_hypotheses(c);
  if (!hyp.valid) throw Error(Errc::InvalidArgument, "coefficients fail " + hyp.violations.front().constraint);
  const TorusField expF = exp(F);
  require_normalized(expF);

  SolveReport report;
  report.grid = cfg.grid;
  report.backend = cfg.backend;
  report.jacobian_mode = cfg.jacobian_mode;

  TorusField u(cfg.grid);
  StageRecord rec;
  if (!detail::solve_stage(u, c, expF, 0.0, cfg, rec))
    throw HomotopyFailure("Newton failed at tau = 0", 0.0, u);
  report.stages.push_back(rec);

  const double nominal = 1.0 / cfg.tau_steps;
  double step = nominal;
  double tau = 0.0;
  while (tau < 1.0) {
    const double next = (tau + step >= 1.0 - 1e-14) ? 1.0 : tau + step;
    if (detail::solve_stage(u, c, expF, next, cfg, rec)) {
      report.stages.push_back(rec);
      tau = next;
      step = std::min(nominal, 2.0 * step);
    } else {
      ++report.failed_stage_attempts;
      step *= 0.5;
      if (step < kMinTauStep)
        throw HomotopyFailure("tau step underflow after tau = " + std::to_string(tau), tau, u);
    }
  }

  const detail::Evaluation fin = detail::evaluate(u, c, expF, 1.0, cfg.backend);
  const Ellipticity ell = ellipticity(fin.a);
  report.final_residual_sup = fin.sup;
  report.final_residual_mean = integral_mean(detail::residual_from(fin.a, c, expF, 1.0));
  report.u_mean = integral_mean(u);
  report.min_a11 = ell.min_a11;
  report.min_a22 = ell.min_a22;
  report.min_Du_minus_C11 = min_value(c.D * u - c.C11);
  report.min_C11_plus_Du = min_value(c.C11 + c.D * u);
  report.norms = sup_norms(u, cfg.backend);
  report.apriori_bound = apriori_bound(c);
  report.c2_within_bound = report.norms.c0 <= report.apriori_bound && report.norms.c1 <= report.apriori_bound &&
                           report.norms.c2 <= report.apriori_bound;
  report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(u), std::move(report)};
}

}  // namespace cyma
