#pragma once

// Inverse change of variables: from a Monge-Ampère potential u back to the
// 1-form a = a_k f^k, and evaluation of the original first-order systems.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "cyma/error.hpp"
#include "cyma/exterior.hpp"
#include "cyma/frames.hpp"
#include "cyma/grid.hpp"
#include "cyma/macoeffs.hpp"

namespace cyma {

struct OneFormField {
  GroupCase group_case = GroupCase::NilYT;
  std::array<TorusField, 4> a;
  /// Sol only: |a_k(end of period) − a_k(start)| for each component.
  std::array<double, 4> wraparound{};
  double wraparound_tolerance = 0;

  const TorusField& operator[](int k) const { return a[k]; }
  bool periodic() const {
    return std::all_of(wraparound.begin(), wraparound.end(),
                       [&](double d) { return d <= wraparound_tolerance; });
  }
};

struct SystemResidualReport {
  double r1_sup = 0, r2_sup = 0, r3_sup = 0;
  double volume_ratio_error = 0;

  double max() const { return std::max({r1_sup, r2_sup, r3_sup, volume_ratio_error}); }
};

namespace detail {

inline void require_case(const FrameSpec& spec, GroupCase c) {
  if (spec.group_case() != c)
    throw Error(Errc::InvalidFrame, "frame case is " + to_string(spec.group_case()) + ", expected " + to_string(c));
  const ValidationReport r = validate(spec);
  if (!r.valid) throw Error(Errc::InvalidFrame, "frame fails " + r.violations.front().constraint);
}

/// Field g(i, j) = f(i, 0) (axis 2) or f(0, j) (axis 1): f frozen on the start line.
inline TorusField start_line(const TorusField& f, int axis) {
  const auto& g = f.grid();
  TorusField out(g);
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j) out(i, j) = axis == 1 ? f(0, j) : f(i, 0);
  return out;
}

}  // namespace detail

/// Nil case, G³₃ ≠ 0. Axis 1 = y, axis 2 = t.
inline OneFormField nil_one_form(const TorusField& u, const FrameSpec& spec, Backend backend = Backend::Spectral) {
  detail::require_case(spec, GroupCase::NilYT);
  if (std::abs(spec.G(3, 3)) <= kExplicitBranchTolerance)
    throw Error(Errc::ExplicitCaseG33Zero, "G³₃ = 0: the potential form does not apply");
  const auto G = [&](int i, int j) { return spec.G(i, j); };
  const auto H = [&](int i, int j) { return spec.H(i, j); };
  const TorusField uy = derivative(u, 1, 1, backend);
  const TorusField ut = derivative(u, 2, 1, backend);

  OneFormField out;
  out.group_case = GroupCase::NilYT;
  out.a[0] = -G(3, 3) * ut - (G(1, 1) * (H(2, 4) * G(2, 3) + H(4, 4) * G(2, 2))) * u;
  out.a[1] = -G(3, 3) * ut - (H(4, 4) * G(1, 1) * G(2, 2)) * u;
  out.a[2] = -(H(4, 4) * G(1, 1) * G(2, 3)) * u;
  out.a[3] = G(1, 1) * uy + G(3, 1) * ut;
  return out;
}

inline constexpr double kZeroMeanTolerance = 1e-10;
inline constexpr double kWraparoundTolerance = 1e-8;

/// Sol case. Axis 1 = x, axis 2 = y. Inner ∫₀¹ dt integrals are grid line
/// means along axis 2, running integrals use cumulative_integral.
inline OneFormField sol_one_form(const TorusField& u, const FrameSpec& spec, Backend backend = Backend::Spectral) {
  detail::require_case(spec, GroupCase::SolR);
  const auto G = [&](int i, int j) { return spec.G(i, j); };
  const auto H = [&](int i, int j) { return spec.H(i, j); };
  const double e2 = G(2, 3) * G(2, 3) + G(2, 4) * G(2, 4);
  if (e2 <= kIdentityTolerance) throw Error(Errc::DegenerateE2, "(G²₃)² + (G²₄)² = " + std::to_string(e2));
  const double mean_u = integral_mean(u);
  if (!(std::abs(mean_u) <= kZeroMeanTolerance))
    throw Error(Errc::NonzeroMeanU, "mean(u) = " + std::to_string(mean_u));

  const Derivatives d = derivatives(u, backend);
  const auto& g = u.grid();
  const TorusField x2 = TorusField::sample(g, [](double, double y) { return y; });

  // ∫₀^y (u_xx − u) dt − y·∫₀¹ (u_xx − u) dt
  const TorusField w = d.d11 - u;
  const TorusField w_mean = line_mean(w, 2);
  const TorusField wy = cumulative_integral(w, 2) - x2 * w_mean;

  // Q(x) = ∫₀^x ∫₀¹ u dt ds − ∫₀¹ (u_x(x,t) − u_x(0,t)) dt
  const TorusField u_mean_y = line_mean(u, 2);
  const TorusField ux_mean_y = line_mean(d.d1, 2);
  const TorusField q = cumulative_integral(u_mean_y, 1) - (ux_mean_y - detail::start_line(ux_mean_y, 1));

  OneFormField out;
  out.group_case = GroupCase::SolR;
  out.a[0] = -(H(1, 1) * G(2, 2) / e2) * (d.d2 - detail::start_line(d.d2, 2)) -
             (2.0 * H(4, 4) * G(4, 3) / e2) * (u - detail::start_line(u, 2)) - (G(1, 1) * H(2, 2) / e2) * wy;
  out.a[1] = (-1.0 / e2) * q;
  out.a[2] = (-1.0 / e2) * (H(2, 2) * G(2, 3) * d.d1 + H(1, 1) * G(2, 4) * d.d2 -
                            H(2, 2) * (G(2, 3) - 2.0 * G(2, 4) * H(4, 4) * G(4, 3)) * u) -
             (H(2, 2) * G(2, 3) / e2) * q;
  out.a[3] = (-1.0 / e2) * (H(2, 2) * G(2, 4) * d.d1 - H(1, 1) * G(2, 3) * d.d2 + H(2, 2) * G(2, 4) * u) -
             (H(2, 2) * G(2, 4) / e2) * q;

  // Wraparound: a running integral advances by its line mean over one period.
  // The y-integral in a1 has that mean subtracted, so only Q can jump, by
  // ∫∫u.
  const double seam_q = std::abs(integral_mean(u_mean_y));
  out.wraparound = {0.0, seam_q / e2,
                    std::abs(H(2, 2) * G(2, 3) / e2) * seam_q, std::abs(H(2, 2) * G(2, 4) / e2) * seam_q};
  const NormReport n = sup_norms(u, backend);
  out.wraparound_tolerance = kWraparoundTolerance * (1.0 + std::max({n.c0, n.c1, n.c2}));
  if (!out.periodic())
    throw Error(Errc::PeriodicityCheckFailed,
                "wraparound defect " + std::to_string(*std::max_element(out.wraparound.begin(), out.wraparound.end())));
  return out;
}

inline OneFormField one_form(const TorusField& u, const FrameSpec& spec, Backend backend = Backend::Spectral) {
  return spec.group_case() == GroupCase::NilYT ? nil_one_form(u, spec, backend) : sol_one_form(u, spec, backend);
}

/// Residuals of the three first-order equations for a, plus the distance of
/// (Ω + da)²/Ω² from e^F computed from the structure equations.
inline SystemResidualReport system_residuals(const OneFormField& a, const TorusField& u, const FrameSpec& spec,
                                             const TorusField& F, Backend backend = Backend::Spectral) {
  for (const auto& ak : a.a) require_same_grid(ak, u);
  require_same_grid(u, F);
  if (a.group_case != spec.group_case()) throw Error(Errc::InvalidArgument, "one-form and frame cases differ");
  const auto G = [&](int i, int j) { return spec.G(i, j); };
  const auto H = [&](int i, int j) { return spec.H(i, j); };
  const auto d1 = [&](int k) { return derivative(a.a[k - 1], 1, 1, backend); };
  const auto d2 = [&](int k) { return derivative(a.a[k - 1], 2, 1, backend); };
  const auto& a2 = a.a[1];
  const auto& a3 = a.a[2];
  const auto& a4 = a.a[3];
  const TorusField expF = exp(F);

  TorusField e1, e2, lhs3;
  if (spec.group_case() == GroupCase::NilYT) {
    // axis 1 = y, axis 2 = t
    const TorusField s = H(2, 4) * a2 + H(3, 4) * a3 + H(4, 4) * a4;
    const TorusField a1t = d2(1), a2t = d2(2), a3t = d2(3), a4t = d2(4);
    e1 = G(1, 1) * d1(2) + (G(1, 1) * G(2, 2)) * s + G(3, 1) * a2t + G(3, 3) * a4t - G(3, 4) * a3t;
    e2 = G(1, 1) * d1(3) + (G(1, 1) * G(2, 3)) * s + G(3, 1) * a3t - G(3, 3) * a1t + G(3, 3) * a2t;
    const TorusField m = -G(3, 3) * a4t + G(3, 4) * a3t;
    lhs3 = (1.0 + G(1, 1) * d1(4) + G(3, 1) * a4t - G(3, 4) * a1t) * (1.0 - G(3, 3) * a2t) -
           (G(3, 3) * G(3, 4)) * (a2t * a2t) - m * m;
  } else {
    // axis 1 = x, axis 2 = y
    const TorusField a1y = d2(1), a2y = d2(2), a3y = d2(3), a4y = d2(4);
    e1 = G(1, 1) * d1(3) - G(2, 3) * a1y + (G(1, 1) * (H(2, 3) * G(3, 3) - H(2, 4) * G(4, 3))) * a2 +
         G(1, 1) * a3 + (G(1, 1) * (H(4, 3) * G(3, 3) - H(4, 4) * G(4, 3))) * a4 - (G(2, 2) * a4y - G(2, 4) * a2y);
    e2 = G(1, 1) * d1(4) - G(2, 4) * a1y - (G(1, 1) * H(2, 4) * G(4, 4)) * a2 - G(1, 1) * a4 -
         (G(2, 3) * a2y - G(2, 2) * a3y);
    const TorusField m1 = G(2, 2) * a4y - G(2, 4) * a2y;
    const TorusField m2 = G(2, 2) * a3y - G(2, 3) * a2y;
    lhs3 = (1.0 + G(1, 1) * d1(2) - G(2, 2) * a1y) * (1.0 + G(2, 3) * a4y - G(2, 4) * a3y) - m1 * m1 - m2 * m2;
  }

  SystemResidualReport r;
  r.r1_sup = sup_abs(e1);
  r.r2_sup = sup_abs(e2);
  r.r3_sup = sup_abs(lhs3 - expF);
  r.volume_ratio_error = sup_abs(volume_ratio(a.a, spec, backend) - expF);
  return r;
}

/// Nil case with G³₃ = 0: Ω̃ = p·f¹⁴ + q·f²³ with p = e^F, q = 1.
struct ExplicitReport {
  double product_defect = 0;    ///< sup |p·q − e^F|
  double exactness_defect = 0;  ///< |mean(e^F − 1)|
  bool product_identity = false;
  bool exact = false;
  /// sup |Pf − e^F| for the alternative form (e^F − 1)f¹⁴ + f²³, whose
  /// Pfaffian is e^F − 1.
  double alternative_form_defect = 0;
  bool certified() const { return product_identity && exact; }
};

struct ExplicitSolution {
  TorusField p, q;
  ExplicitReport report;
};

inline constexpr double kExactnessTolerance = 1e-12;

inline ExplicitSolution nil_explicit_g33zero(const FrameSpec& spec, const TorusField& F) {
  detail::require_case(spec, GroupCase::NilYT);
  if (std::abs(spec.G(3, 3)) > kExplicitBranchTolerance)
    throw Error(Errc::NotExplicitCase, "|G³₃| = " + std::to_string(std::abs(spec.G(3, 3))) + " exceeds 1e-10");
  if (!F.all_finite()) throw Error(Errc::InvalidArgument, "F contains non-finite values");

  ExplicitSolution s;
  s.p = exp(F);
  s.q = TorusField(F.grid(), 1.0);
  s.report.product_defect = sup_abs(s.p * s.q - exp(F));
  s.report.product_identity = s.report.product_defect == 0.0;
  s.report.exactness_defect = std::abs(integral_mean(s.p - 1.0));
  s.report.exact = s.report.exactness_defect <= kExactnessTolerance;
  s.report.alternative_form_defect = sup_abs((s.p - 1.0) * s.q - exp(F));
  return s;
}

}  // namespace cyma
