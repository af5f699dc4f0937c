#pragma once

// Shared problem fixtures for the solver, reconstruction and acceptance suites.

#include <cmath>
#include <optional>

#include "cyma/grid.hpp"
#include "cyma/macoeffs.hpp"
#include "oracles.hpp"

namespace fixture {

using namespace cyma;

inline FrameSpec nil_frame() { return FrameSpec(GroupCase::NilYT, oracle::nil_example_G()); }
inline FrameSpec sol_frame() { return FrameSpec(GroupCase::SolR, oracle::sol_example_G()); }

/// Worked-example coefficients, as exact literals.
inline MACoefficients nil_coeffs() { return {0, 0, 1, 2, 0, 1, 0, 1, 1, GroupCase::NilYT}; }
inline MACoefficients sol_coeffs() { return {0, 1, 0, 3, 0, 1, -1, 2, 1, GroupCase::SolR}; }

/// normalize_F(0.3·cos 2πx₁ + 0.2·sin 2πx₂).
inline TorusField F_a(const TorusGrid& g) {
  return normalize_F(TorusField::sample(g, [](double x, double y) {
    return 0.3 * std::cos(oracle::kTwoPi * x) + 0.2 * std::sin(oracle::kTwoPi * y);
  }));
}

/// u* = amp·(cos 2πx₁·cos 2πx₂ + 0.5·sin 2πx₂).
inline oracle::TrigPoly manufactured_u(double amp) {
  oracle::TrigPoly p;
  // cos a cos b = ½cos(a+b) + ½cos(a−b)
  p.modes = {{1, 1, 0.5, 0.0}, {1, -1, 0.5, 0.0}, {0, 1, 0.0, 0.5}};
  return p.scaled(amp);
}

struct Manufactured {
  oracle::TrigPoly u_star;
  TorusField expF;  ///< (A11A22 − A12² − E1)/E2 from the analytic derivatives of u*
  double min_expF = 0;
  double mean_expF = 0;
  double min_a11 = 0, min_a22 = 0;
  std::optional<TorusField> F;  ///< log e^F when e^F > 0 everywhere
};

inline Manufactured manufactured(const MACoefficients& c, double amp, const TorusGrid& g) {
  Manufactured m;
  m.u_star = manufactured_u(amp);
  const auto& p = m.u_star;
  const TorusField u = p.sample(g), u2 = p.sample(g, 0, 1);
  const TorusField a11 = p.sample(g, 2, 0) + c.B11 * u2 + c.C11 + c.D * u;
  const TorusField a12 = p.sample(g, 1, 1) + c.B12 * u2 + c.C12;
  const TorusField a22 = p.sample(g, 0, 2) + c.B22 * u2 + c.C22;
  m.expF = (1.0 / c.E2) * (a11 * a22 - a12 * a12 - c.E1);
  m.min_expF = min_value(m.expF);
  m.mean_expF = integral_mean(m.expF);
  m.min_a11 = min_value(a11);
  m.min_a22 = min_value(a22);
  if (m.min_expF > 0) m.F = m.expF.map([](double v) { return std::log(v); });
  return m;
}

}  // namespace fixture
