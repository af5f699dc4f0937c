#pragma once

// Constant coefficients of the generalized Monge-Ampère equation
//
//   A11[u]·A22[u] − A12[u]² = E1 + E2·e^F,
//   A11[u] = u_11 + B11·u_2 + C11 + D·u,
//   A12[u] = u_12 + B12·u_2 + C12,
//   A22[u] = u_22 + B22·u_2 + C22,
//
// obtained from an adapted frame by the change of variables a = a(u).

#include <cmath>
#include <sstream>
#include <string>

#include "cyma/error.hpp"
#include "cyma/frames.hpp"

namespace cyma {

struct MACoefficients {
  double B11 = 0, B12 = 0, B22 = 0;
  double C11 = 0, C12 = 0, C22 = 0;
  double D = 0;
  double E1 = 0, E2 = 0;
  GroupCase group_case = GroupCase::NilYT;

  double b_identity_defect() const { return B11 * B22 - B12 * B12 - D; }
  double c_identity_defect() const { return C11 * C22 - C12 * C12 - E1 - E2; }
};

inline constexpr double kIdentityTolerance = 1e-10;
inline constexpr double kExplicitBranchTolerance = 1e-10;

namespace detail {

inline double identity_scale(const MACoefficients& c) {
  return 1.0 + std::abs(c.C11 * c.C22) + c.C12 * c.C12 + std::abs(c.B11 * c.B22) + c.B12 * c.B12;
}

inline void assert_identities(const MACoefficients& c, const char* where) {
  const double scale = identity_scale(c);
  if (std::abs(c.b_identity_defect()) > kIdentityTolerance * scale ||
      std::abs(c.c_identity_defect()) > kIdentityTolerance * scale) {
    std::ostringstream os;
    os.precision(17);
    os << where << ": coefficient identities violated (B defect " << c.b_identity_defect() << ", C defect "
       << c.c_identity_defect() << ")";
    internal_error(os.str());
  }
}

inline void require_valid(const FrameSpec& spec, GroupCase expected) {
  if (spec.group_case() != expected)
    throw Error(Errc::InvalidFrame, "frame case is " + to_string(spec.group_case()) + ", expected " +
                                        to_string(expected));
  const auto report = validate(spec);
  if (!report.valid) throw Error(Errc::InvalidFrame, "frame fails " + report.violations.front().constraint);
}

}  // namespace detail

/// Coefficients for the Nil³×ℝ case, G³₃ ≠ 0 branch. Base axes: 1 = y, 2 = t.
///
/// E2 is 1/(G¹₁G³₃)². This is the value the reduction actually produces; it
/// agrees with (G¹₁G³₃)² only when |G¹₁G³₃| = 1.
inline MACoefficients nil_coefficients(const FrameSpec& spec) {
  detail::require_valid(spec, GroupCase::NilYT);
  const auto G = [&](int i, int j) { return spec.G(i, j); };
  const auto H = [&](int i, int j) { return spec.H(i, j); };
  if (std::abs(G(3, 3)) <= kExplicitBranchTolerance)
    throw Error(Errc::ExplicitCaseG33Zero, "G³₃ = 0: use the explicit solution (command 'explicit')");

  const double g11 = G(1, 1), g22 = G(2, 2), g23 = G(2, 3), g31 = G(3, 1), g33 = G(3, 3), g34 = G(3, 4);
  const double h24 = H(2, 4), h44 = H(4, 4);

  MACoefficients c;
  c.group_case = GroupCase::NilYT;
  c.B11 = g22 * g31 * g31 * h44 / (g11 * g33) - 2.0 * g23 * g31 * g34 * h44 / (g11 * g33) + g23 * g34 * h24 / g11;
  c.B12 = -g22 * g31 * h44 / g33 + g23 * g34 * h44 / g33;
  c.B22 = g11 * g22 * h44 / g33;
  c.C11 = 1.0 / (g11 * g11) + g31 * g31 / (g11 * g11 * g33 * g33) + g34 / (g11 * g11 * g33);
  c.C12 = -g31 / (g11 * g33 * g33);
  c.C22 = 1.0 / (g33 * g33);
  c.D = 0.0;
  c.E1 = g33 * g34 / (g11 * g11 * std::pow(g33, 4));
  c.E2 = 1.0 / ((g11 * g33) * (g11 * g33));
  detail::assert_identities(c, "nil_coefficients");
  return c;
}

/// Coefficients for the Sol³×ℝ case. Base axes: 1 = x, 2 = y. The mixed
/// operator carries no constant term, so C12 = 0.
inline MACoefficients sol_coefficients(const FrameSpec& spec) {
  detail::require_valid(spec, GroupCase::SolR);
  const auto G = [&](int i, int j) { return spec.G(i, j); };
  const auto H = [&](int i, int j) { return spec.H(i, j); };
  const double e2 = G(2, 3) * G(2, 3) + G(2, 4) * G(2, 4);
  if (e2 <= kIdentityTolerance)
    throw Error(Errc::DegenerateE2, "(G²₃)² + (G²₄)² = " + std::to_string(e2));

  const double g11 = G(1, 1), g22 = G(2, 2), g23 = G(2, 3), g24 = G(2, 4), g43 = G(4, 3);
  const double h11 = H(1, 1), h22 = H(2, 2), h44 = H(4, 4);

  MACoefficients c;
  c.group_case = GroupCase::SolR;
  c.B11 = 2.0 * h11 * g22 * g23 * (g24 + g23 * h44 * g43) / e2;
  c.B12 = (g24 * g24 - g23 * g23 + 2.0 * g23 * g24 * h44 * g43) / e2;
  c.B22 = -2.0 * g11 * h22 * g24 * (g23 - g24 * h44 * g43) / e2;
  c.C11 = h11 * (g22 * g22 + g23 * g23 + g24 * g24);
  c.C12 = 0.0;
  c.C22 = g11;
  c.D = -1.0;
  c.E1 = g22 * g22;
  c.E2 = e2;
  detail::assert_identities(c, "sol_coefficients");
  return c;
}

inline MACoefficients coefficients(const FrameSpec& spec) {
  return spec.group_case() == GroupCase::NilYT ? nil_coefficients(spec) : sol_coefficients(spec);
}

/// Structural hypotheses required by the existence theory.
inline ValidationReport check_hypotheses(const MACoefficients& c) {
  ValidationReport r;
  if (!(c.C11 + c.C22 > 0.0)) r.fail("C11 + C22 > 0", c.C11 + c.C22, 0.0);
  if (!(c.D <= 0.0)) r.fail("D ≤ 0", c.D, 0.0);
  if (!(c.E1 > 0.0)) r.fail("E1 > 0", c.E1, 0.0);
  if (!(c.E2 > 0.0)) r.fail("E2 > 0", c.E2, 0.0);
  const double tol = kIdentityTolerance * detail::identity_scale(c);
  if (!(std::abs(c.b_identity_defect()) <= tol)) r.fail("B11·B22 − B12² = D", c.b_identity_defect(), tol);
  if (!(std::abs(c.c_identity_defect()) <= tol)) r.fail("C11·C22 − C12² = E1 + E2", c.c_identity_defect(), tol);

  if (c.E1 > 0.0 && c.E1 <= 1e-8) r.warnings.push_back("E1 is within 1e-8 of degeneracy");
  if (c.E2 > 0.0 && c.E2 <= 1e-8) r.warnings.push_back("E2 is within 1e-8 of degeneracy");
  if (c.group_case == GroupCase::SolR)
    r.warnings.push_back("C12 = 0 assumed for the Sol³×ℝ reduction (no constant in the mixed term)");
  return r;
}

}  // namespace cyma
